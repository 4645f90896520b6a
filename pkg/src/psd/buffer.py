"""Episode-contiguous replay buffer with (L, s_t, s_t+1, s_t+L) tuple sampling.

Episodes are stored whole and evicted whole (FIFO at episode granularity),
so L-step tuples never cross an episode boundary or mix period values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    pass


class InsufficientDataError(RuntimeError):
    pass


@dataclass
class Episode:
    episode_id: int
    L: int
    states: np.ndarray      # (T+1, obs_dim)
    actions: np.ndarray     # (T, act_dim)
    v_x: np.ndarray         # (T,)
    z: np.ndarray | None = None

    def __len__(self):
        return self.actions.shape[0]


@dataclass
class Transition:
    episode_id: int
    t: int
    L: int
    s: np.ndarray
    a: np.ndarray
    s_next: np.ndarray
    v_x: float
    done: bool


class EpisodeBuffer:
    def __init__(self, capacity: int = 500_000):
        self.capacity = capacity
        self.episodes: list[Episode] = []
        self._size = 0
        self._next_id = 0

    def __len__(self):
        return self._size

    def push_episode(self, states, actions, v_x, L: int, z=None) -> Episode:
        states = np.asarray(states, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        v_x = np.asarray(v_x, dtype=np.float64)
        T = actions.shape[0]
        if states.shape[0] != T + 1:
            raise DataError(
                f"episode needs T+1 states for T actions, got {states.shape[0]}/{T}"
            )
        if v_x.shape[0] != T:
            raise DataError("v_x length must match action count")
        L = int(L)
        if L < 1:
            raise DataError(f"invalid period {L}")
        ep = Episode(self._next_id, L, states, actions, v_x,
                     None if z is None else np.asarray(z, dtype=np.float64))
        self._next_id += 1
        self.episodes.append(ep)
        self._size += T
        while self._size > self.capacity and len(self.episodes) > 1:
            evicted = self.episodes.pop(0)
            self._size -= len(evicted)
        return ep

    def push_transitions(self, transitions: list[Transition], z=None) -> Episode:
        """Validate one contiguous constant-L episode and store it."""
        if not transitions:
            raise DataError("empty episode")
        L = transitions[0].L
        for i, tr in enumerate(transitions):
            if tr.t != i:
                raise DataError(f"non-contiguous timestep {tr.t} at position {i}")
            if tr.L != L:
                raise DataError("period L must be constant within an episode")
        states = [tr.s for tr in transitions] + [transitions[-1].s_next]
        actions = [tr.a for tr in transitions]
        v_x = [tr.v_x for tr in transitions]
        return self.push_episode(states, actions, v_x, L, z=z)

    def sample_sac_batch(self, rng: np.random.Generator, n: int) -> dict:
        """Uniform transitions across all stored episodes."""
        if self._size == 0:
            raise InsufficientDataError("buffer is empty")
        counts = np.array([len(ep) for ep in self.episodes])
        flat = rng.integers(0, counts.sum(), size=n)
        bounds = np.cumsum(counts)
        ep_idx = np.searchsorted(bounds, flat, side="right")
        t_idx = flat - (bounds[ep_idx] - counts[ep_idx])
        batch = {
            "L": np.empty(n, dtype=np.int64),
            "s": [], "a": [], "s_next": [],
            "v_x": np.empty(n), "done": np.zeros(n),
            "z": [],
        }
        has_z = self.episodes[0].z is not None
        for j, (e, t) in enumerate(zip(ep_idx, t_idx)):
            ep = self.episodes[e]
            batch["L"][j] = ep.L
            batch["s"].append(ep.states[t])
            batch["a"].append(ep.actions[t])
            batch["s_next"].append(ep.states[t + 1])
            batch["v_x"][j] = ep.v_x[t]
            if has_z:
                batch["z"].append(ep.z)
        batch["s"] = np.array(batch["s"])
        batch["a"] = np.array(batch["a"])
        batch["s_next"] = np.array(batch["s_next"])
        batch["z"] = np.array(batch["z"]) if has_z else None
        return batch

    def tuple_start_counts(self) -> np.ndarray:
        """Valid (episode, t) start counts: an episode of T transitions at
        period L offers max(0, T - L) tuple starts."""
        return np.array([max(0, len(ep) - ep.L) for ep in self.episodes])

    def sample_tuple_batch(self, rng: np.random.Generator, n: int):
        """Uniform (L, s_t, s_t+1, s_t+L[, z]) tuples over valid starts."""
        counts = self.tuple_start_counts()
        total = counts.sum()
        if total == 0:
            raise InsufficientDataError("no episode long enough for an L-step tuple")
        flat = rng.integers(0, total, size=n)
        bounds = np.cumsum(counts)
        ep_idx = np.searchsorted(bounds, flat, side="right")
        t_idx = flat - (bounds[ep_idx] - counts[ep_idx])
        L = np.empty(n, dtype=np.int64)
        s_t, s_t1, s_tL, zs = [], [], [], []
        has_z = self.episodes[0].z is not None
        for j, (e, t) in enumerate(zip(ep_idx, t_idx)):
            ep = self.episodes[e]
            L[j] = ep.L
            s_t.append(ep.states[t])
            s_t1.append(ep.states[t + 1])
            s_tL.append(ep.states[t + ep.L])
            if has_z:
                zs.append(ep.z)
        out = [L, np.array(s_t), np.array(s_t1), np.array(s_tL)]
        if has_z:
            out.append(np.array(zs))
        return tuple(out)
