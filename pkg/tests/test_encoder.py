"""Period embedding, chord geometry, and the circular-encoder objective."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psd import envs
from psd.buffer import EpisodeBuffer
from psd.encoder import (
    PsdEncoder,
    PsdEncoderConfig,
    embed_period,
    embed_period_batch,
    optimal_chord,
    psd_encoder_loss,
    train_encoder_step,
)
from psd.nn import ConfigurationError
from psd.sac import rollout_episode, store_trajectory


def test_embed_period_small_case():
    # D=4: omega = [1, 1, 1e-2, 1e-2]; L=1 gives sin/cos pairs directly
    e = embed_period(1, 4)
    expect = [np.sin(1.0), np.cos(1.0), np.sin(0.01), np.cos(0.01)]
    assert np.allclose(e, expect, atol=1e-12)


def test_embed_period_zero_is_alternating_unit():
    e = embed_period(0, 8)
    assert np.array_equal(e, [0.0, 1.0] * 4)


def test_embed_period_batch_matches_single():
    Ls = np.array([0, 1, 5, 10, 32])
    batch = embed_period_batch(Ls, 8)
    rows = np.stack([embed_period(int(x), 8) for x in Ls])
    assert np.array_equal(batch, rows)


def test_embed_period_validation():
    with pytest.raises(ConfigurationError):
        embed_period(1, 3)  # odd dimension
    with pytest.raises(ConfigurationError):
        embed_period(-1, 4)


@settings(max_examples=100, deadline=None)
@given(L=st.integers(0, 10_000), D=st.sampled_from([2, 4, 8, 16]))
def test_embed_period_bounded_property(L, D):
    e = embed_period(L, D)
    assert e.shape == (D,)
    assert np.all(np.abs(e) <= 1.0)


def test_optimal_chord_values():
    assert optimal_chord(10) == pytest.approx(10 * np.sin(np.pi / 20))
    assert optimal_chord(10) == pytest.approx(1.5643446504, abs=1e-9)
    assert optimal_chord(20) == pytest.approx(1.5691819, abs=1e-6)


def test_optimal_chord_monotone_toward_half_pi():
    vals = [optimal_chord(L) for L in range(2, 200)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] < np.pi / 2
    # a full period of chords never exceeds the circumference
    for L in (5, 10, 40):
        assert 2 * L * optimal_chord(L) <= np.pi * L + 1e-12


def test_encoder_requires_latent_dim_3():
    with pytest.raises(ConfigurationError):
        PsdEncoderConfig(d=2)
    cfg = PsdEncoderConfig(d=2, allow_small_d=True)
    assert cfg.d == 2


def test_encode_single_and_batch_agree():
    rng = np.random.default_rng(0)
    enc = PsdEncoder(7, PsdEncoderConfig(), rng)
    obs = rng.standard_normal((4, 7))
    batch = enc.encode(obs, 10)
    assert batch.shape == (4, 3)
    for i in range(4):
        # single-row and batched matmuls may differ in the last bit
        assert np.allclose(enc.encode(obs[i], 10), batch[i], atol=1e-12)


def test_encoding_depends_on_period():
    rng = np.random.default_rng(1)
    enc = PsdEncoder(7, PsdEncoderConfig(), rng)
    obs = rng.standard_normal(7)
    assert not np.array_equal(enc.encode(obs, 5), enc.encode(obs, 20))


def scripted_buffer(L, episodes=6):
    spec = envs.make_spec("ring_world")
    buf = EpisodeBuffer()
    for i in range(episodes):
        traj = rollout_episode(
            None, spec, L, seed=i,
            action_fn=lambda st: envs.scripted_periodic_policy(spec, st, L))
        store_trajectory(buf, traj)
    return buf


def test_loss_decreases_on_scripted_data():
    rng = np.random.default_rng(0)
    cfg = PsdEncoderConfig(hidden_units=64, lr=1e-3, batch=256)
    enc = PsdEncoder(7, cfg, rng)
    buf = scripted_buffer(L=10)
    losses = []
    for _ in range(80):
        batch = buf.sample_tuple_batch(rng, cfg.batch)
        losses.append(train_encoder_step(enc, batch)["loss"])
    assert np.isfinite(losses).all()
    assert np.mean(losses[-10:]) < np.mean(losses[:10])


def test_loss_penalty_terms_are_capped():
    # with lambda terms capped at eps, the loss stays finite for any params
    rng = np.random.default_rng(2)
    cfg = PsdEncoderConfig(hidden_units=16)
    enc = PsdEncoder(7, cfg, rng)
    buf = scripted_buffer(L=8, episodes=2)
    batch = buf.sample_tuple_batch(rng, 64)
    loss = psd_encoder_loss(enc, enc.params.as_tensors(), batch)
    assert np.isfinite(loss.data)
