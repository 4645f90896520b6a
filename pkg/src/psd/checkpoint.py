"""Bit-exact binary checkpoints.

Layout (little-endian): magic \"PSDCKPT1\", version u32, array count u32,
then per array: name length u16, UTF-8 name, rank u8, dims u32 each,
float64 payload. A u32-length JSON blob with scalars (config snapshot,
epoch counters, curriculum state, RNG state) follows the arrays.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .buffer import Episode
from .config import config_from_dict
from .nn import AdamState

MAGIC = b"PSDCKPT1"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _collect_arrays(state) -> dict[str, np.ndarray]:
    arrays = {}
    for name, arr in state.encoder.params.items():
        arrays[f"encoder/{name}"] = arr
    _opt_arrays(arrays, "opt/encoder", state.encoder.opt)
    for name, arr in state.agent.params.items():
        arrays[f"agent/{name}"] = arr
    for name, arr in state.agent.target_params.items():
        arrays[f"agent_target/{name}"] = arr
    _opt_arrays(arrays, "opt/pi", state.agent.pi_opt)
    _opt_arrays(arrays, "opt/q", state.agent.q_opt)
    _opt_arrays(arrays, "opt/alpha", state.agent.alpha_opt)
    if state.metra_encoder is not None:
        for name, arr in state.metra_encoder.params.items():
            arrays[f"metra/{name}"] = arr
        _opt_arrays(arrays, "opt/metra", state.metra_encoder.opt)
        _opt_arrays(arrays, "opt/lambda_m", state.metra_encoder.lambda_opt)
    for i, ep in enumerate(state.buffer.episodes):
        arrays[f"buffer/{i:06d}/states"] = ep.states
        arrays[f"buffer/{i:06d}/actions"] = ep.actions
        arrays[f"buffer/{i:06d}/v_x"] = ep.v_x
        if ep.z is not None:
            arrays[f"buffer/{i:06d}/z"] = ep.z
    return arrays


def _opt_arrays(arrays: dict, prefix: str, opt: AdamState) -> None:
    for name, arr in opt.m.items():
        arrays[f"{prefix}/m/{name}"] = arr
    for name, arr in opt.v.items():
        arrays[f"{prefix}/v/{name}"] = arr


def save_checkpoint(state, path) -> None:
    arrays = _collect_arrays(state)
    blob = {
        "config": state.cfg.to_dict(),
        "epoch": state.epoch,
        "episodes": state.episodes,
        "episodes_since_eval": state.episodes_since_eval,
        "bounds": {
            "L_min": state.bounds.L_min,
            "L_max": state.bounds.L_max,
            "updated_once_min": state.bounds.updated_once_min,
            "updated_once_max": state.bounds.updated_once_max,
            "history": state.bounds.history,
        },
        "log_alpha": state.agent.log_alpha,
        "opt_steps": {
            "encoder": state.encoder.opt.step,
            "pi": state.agent.pi_opt.step,
            "q": state.agent.q_opt.step,
            "alpha": state.agent.alpha_opt.step,
        },
        "rng_state": state.rng.bit_generator.state,
        "buffer": {
            "episode_ids": [ep.episode_id for ep in state.buffer.episodes],
            "episode_L": [ep.L for ep in state.buffer.episodes],
            "next_id": state.buffer._next_id,
        },
    }
    if state.metra_encoder is not None:
        blob["lambda_m"] = state.metra_encoder.lambda_m
        blob["opt_steps"]["metra"] = state.metra_encoder.opt.step
        blob["opt_steps"]["lambda_m"] = state.metra_encoder.lambda_opt.step

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(arrays)))
        for name in sorted(arrays):
            arr = np.ascontiguousarray(arrays[name], dtype=np.float64)
            nb = name.encode("utf-8")
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.astype("<f8").tobytes())
        jb = json.dumps(blob).encode("utf-8")
        fh.write(struct.pack("<I", len(jb)))
        fh.write(jb)


def read_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    with open(path, "rb") as fh:
        def take(n: int) -> bytes:
            buf = fh.read(n)
            if len(buf) != n:
                raise CheckpointError(f"{path}: truncated file")
            return buf

        if take(8) != MAGIC:
            raise CheckpointError(f"{path}: bad magic")
        (version,) = struct.unpack("<I", take(4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        (count,) = struct.unpack("<I", take(4))
        arrays = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", take(2))
            name = take(nlen).decode("utf-8")
            (rank,) = struct.unpack("<B", take(1))
            shape = tuple(struct.unpack("<I", take(4))[0] for _ in range(rank))
            n = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(take(8 * n), dtype="<f8").reshape(shape)
            arrays[name] = data.copy()
        (jlen,) = struct.unpack("<I", take(4))
        try:
            blob = json.loads(take(jlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"{path}: corrupt metadata: {e}")
    return arrays, blob


def load_checkpoint(path):
    """Rebuild a full training state from a checkpoint file."""
    from .train import init_train_state

    arrays, blob = read_checkpoint(path)
    cfg = config_from_dict(blob["config"])
    state = init_train_state(cfg)

    def restore_params(paramset, prefix):
        for name in paramset.names():
            paramset[name] = arrays[f"{prefix}/{name}"].copy()

    def restore_opt(opt, prefix, step):
        opt.step = step
        opt.m = {k[len(prefix) + 3:]: v.copy() for k, v in arrays.items()
                 if k.startswith(f"{prefix}/m/")}
        opt.v = {k[len(prefix) + 3:]: v.copy() for k, v in arrays.items()
                 if k.startswith(f"{prefix}/v/")}

    restore_params(state.encoder.params, "encoder")
    restore_params(state.agent.params, "agent")
    restore_params(state.agent.target_params, "agent_target")
    steps = blob["opt_steps"]
    restore_opt(state.encoder.opt, "opt/encoder", steps["encoder"])
    restore_opt(state.agent.pi_opt, "opt/pi", steps["pi"])
    restore_opt(state.agent.q_opt, "opt/q", steps["q"])
    restore_opt(state.agent.alpha_opt, "opt/alpha", steps["alpha"])
    if state.metra_encoder is not None:
        restore_params(state.metra_encoder.params, "metra")
        restore_opt(state.metra_encoder.opt, "opt/metra", steps["metra"])
        restore_opt(state.metra_encoder.lambda_opt, "opt/lambda_m",
                    steps["lambda_m"])
        state.metra_encoder.lambda_m = blob["lambda_m"]

    buf = blob["buffer"]
    state.buffer.episodes = []
    for i, (eid, L) in enumerate(zip(buf["episode_ids"], buf["episode_L"])):
        state.buffer.episodes.append(Episode(
            episode_id=eid,
            L=L,
            states=arrays[f"buffer/{i:06d}/states"],
            actions=arrays[f"buffer/{i:06d}/actions"],
            v_x=arrays[f"buffer/{i:06d}/v_x"],
            z=arrays.get(f"buffer/{i:06d}/z"),
        ))
    state.buffer._size = sum(len(ep) for ep in state.buffer.episodes)
    state.buffer._next_id = buf["next_id"]

    state.agent.log_alpha = blob["log_alpha"]
    state.epoch = blob["epoch"]
    state.episodes = blob["episodes"]
    state.episodes_since_eval = blob["episodes_since_eval"]
    b = blob["bounds"]
    state.bounds.L_min = b["L_min"]
    state.bounds.L_max = b["L_max"]
    state.bounds.updated_once_min = b["updated_once_min"]
    state.bounds.updated_once_max = b["updated_once_max"]
    state.bounds.history = [tuple(h) for h in b["history"]]
    state.rng.bit_generator.state = blob["rng_state"]
    return state
