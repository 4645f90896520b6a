"""Rolled-out skill trajectories and their CSV interchange format.

CSV schema: header `t,L,obs_0..obs_{n-1},act_0..act_{m-1},r_psd,r_ext`
(plus `z_0..z_{k-1}` columns when a skill vector is attached), one row per
step, UTF-8, LF line endings. A final row at t=T carries the terminal
state with empty action/reward cells.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class TrajectoryFormatError(ValueError):
    def __init__(self, msg, row=None):
        super().__init__(msg if row is None else f"row {row}: {msg}")
        self.row = row


@dataclass
class SkillTrajectory:
    L: int
    states: np.ndarray          # (T, obs_dim), state at each step start
    actions: np.ndarray         # (T, act_dim)
    v_x: np.ndarray             # (T,)
    final_state: np.ndarray     # observation after the last action
    z: np.ndarray | None = None
    r_psd: np.ndarray | None = None
    r_ext: np.ndarray | None = None
    task_rewards: np.ndarray | None = None
    rewards: np.ndarray = field(default=None)

    def __len__(self):
        return self.states.shape[0]

    def all_states(self) -> np.ndarray:
        """States including the terminal one: (T+1, obs_dim)."""
        return np.vstack([self.states, self.final_state[None, :]])


def write_trajectory_csv(path, traj: SkillTrajectory) -> None:
    path = Path(path)
    T, n = traj.states.shape
    m = traj.actions.shape[1]
    header = ["t", "L"]
    header += [f"obs_{i}" for i in range(n)]
    header += [f"act_{i}" for i in range(m)]
    header += ["r_psd", "r_ext"]
    k = 0 if traj.z is None else len(traj.z)
    header += [f"z_{i}" for i in range(k)]
    r_psd = traj.r_psd if traj.r_psd is not None else np.zeros(T)
    r_ext = traj.r_ext if traj.r_ext is not None else np.zeros(T)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t in range(T):
            row = [t, traj.L]
            row += [repr(float(v)) for v in traj.states[t]]
            row += [repr(float(v)) for v in traj.actions[t]]
            row += [repr(float(r_psd[t])), repr(float(r_ext[t]))]
            if k:
                row += [repr(float(v)) for v in traj.z]
            w.writerow(row)
        # terminal state row: action/reward cells are left empty
        row = [T, traj.L]
        row += [repr(float(v)) for v in traj.final_state]
        row += [""] * (m + 2)
        if k:
            row += [repr(float(v)) for v in traj.z]
        w.writerow(row)


def read_trajectory_csv(path) -> SkillTrajectory:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TrajectoryFormatError(f"{path}: empty file")
        if header[:2] != ["t", "L"]:
            raise TrajectoryFormatError(f"{path}: header must start with t,L")
        obs_cols = [i for i, h in enumerate(header) if h.startswith("obs_")]
        act_cols = [i for i, h in enumerate(header) if h.startswith("act_")]
        z_cols = [i for i, h in enumerate(header) if h.startswith("z_")]
        try:
            rp_col = header.index("r_psd")
            re_col = header.index("r_ext")
        except ValueError:
            raise TrajectoryFormatError(f"{path}: missing r_psd/r_ext columns")
        states, actions, r_psd, r_ext = [], [], [], []
        L = None
        z = None
        final_state = None
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TrajectoryFormatError(
                    f"{path}: expected {len(header)} fields, got {len(row)}",
                    row=rownum,
                )
            if final_state is not None:
                raise TrajectoryFormatError(
                    f"{path}: data after the terminal state row", row=rownum)
            try:
                row_L = int(row[1])
                if L is not None and row_L != L:
                    raise TrajectoryFormatError(
                        f"{path}: period changed from {L} to {row_L}",
                        row=rownum)
                L = row_L
                obs = [float(row[i]) for i in obs_cols]
                if all(row[i] == "" for i in act_cols + [rp_col, re_col]):
                    final_state = np.array(obs)
                else:
                    states.append(obs)
                    actions.append([float(row[i]) for i in act_cols])
                    r_psd.append(float(row[rp_col]))
                    r_ext.append(float(row[re_col]))
                if z_cols:
                    z = np.array([float(row[i]) for i in z_cols])
            except ValueError as e:
                raise TrajectoryFormatError(f"{path}: {e}", row=rownum)
        if L is None or not states:
            raise TrajectoryFormatError(f"{path}: no data rows")
    states = np.array(states)
    if final_state is None:
        final_state = states[-1].copy()
    return SkillTrajectory(
        L=L,
        states=states,
        actions=np.array(actions),
        v_x=np.zeros(len(states)),
        final_state=final_state,
        z=z,
        r_psd=np.array(r_psd),
        r_ext=np.array(r_ext),
    )
