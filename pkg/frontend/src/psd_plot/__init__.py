"""Figure generation for periodic-skill training artifacts.

Consumes the CSV/JSONL files written by the `psd` CLI (spectrum tables,
latent PCA projections, per-epoch metrics, trajectory dumps) and renders
PNG figures. Rendering is deterministic: identical inputs produce
byte-identical files.
"""

__version__ = "0.1.0"
