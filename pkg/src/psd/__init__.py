"""Periodic skill training toolkit: circular latent representations,
period-conditioned policies, and the analysis machinery around them."""

__version__ = "0.1.0"
