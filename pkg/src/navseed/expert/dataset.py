"""Expert transition datasets and their ``NAVD`` binary file format.

Layout (little-endian): magic ``NAVD``, u32 version, u32 state_dim,
u32 action_dim, u64 record_count, then per record the float32 values
``state, action, reward, next_state, done_kind``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from ..sim.env import OBS_DIM
from ..sim.reward import TerminalKind

MAGIC = b"NAVD"
VERSION = 1
ACTION_DIM = 2
_HEADER = struct.Struct("<4sIIIQ")


class DatasetFormatError(ValueError):
    pass


class BadMagicError(DatasetFormatError):
    pass


class VersionMismatchError(DatasetFormatError):
    pass


class DimensionMismatchError(DatasetFormatError):
    pass


class TruncatedFileError(DatasetFormatError):
    pass


@dataclass(frozen=True)
class TransitionRecord:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done_kind: TerminalKind

    @property
    def done(self) -> bool:
        return self.done_kind.done


class ExpertDataset:
    """Column-stored transitions; ``dataset[i]`` yields a :class:`TransitionRecord`."""

    def __init__(self, states, actions, rewards, next_states, kinds):
        self.states = np.ascontiguousarray(states, dtype=np.float32).reshape(-1, OBS_DIM)
        self.actions = np.ascontiguousarray(actions, dtype=np.float32).reshape(-1, ACTION_DIM)
        self.rewards = np.ascontiguousarray(rewards, dtype=np.float32).reshape(-1)
        self.next_states = np.ascontiguousarray(next_states, dtype=np.float32).reshape(-1, OBS_DIM)
        self.kinds = np.ascontiguousarray(kinds, dtype=np.uint8).reshape(-1)
        n = len(self.states)
        if not all(len(a) == n for a in (self.actions, self.rewards, self.next_states, self.kinds)):
            raise ValueError("dataset columns differ in length")

    @classmethod
    def from_records(cls, records) -> ExpertDataset:
        records = list(records)
        if not records:
            return cls(np.zeros((0, OBS_DIM)), np.zeros((0, 2)), np.zeros(0), np.zeros((0, OBS_DIM)), np.zeros(0))
        return cls(
            np.stack([r.state for r in records]),
            np.stack([r.action for r in records]),
            np.array([r.reward for r in records]),
            np.stack([r.next_state for r in records]),
            np.array([int(r.done_kind) for r in records]),
        )

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i: int) -> TransitionRecord:
        return TransitionRecord(
            self.states[i], self.actions[i], float(self.rewards[i]), self.next_states[i], TerminalKind(int(self.kinds[i]))
        )

    @property
    def dones(self) -> np.ndarray:
        """Bootstrap mask: 1 for arrival/collision, 0 otherwise (timeouts still bootstrap)."""
        return ((self.kinds == TerminalKind.ARRIVED) | (self.kinds == TerminalKind.COLLIDED)).astype(np.float32)

    def stats(self) -> dict:
        ends = np.flatnonzero(self.kinds != TerminalKind.NONE)
        returns = []
        start = 0
        for e in ends:
            returns.append(float(self.rewards[start : e + 1].astype(np.float64).sum()))
            start = e + 1
        kinds = self.kinds[ends]
        return {
            "records": len(self),
            "episodes": len(ends),
            "success_episodes": int((kinds == TerminalKind.ARRIVED).sum()),
            "collision_episodes": int((kinds == TerminalKind.COLLIDED).sum()),
            "timeout_episodes": int((kinds == TerminalKind.TIMEOUT).sum()),
            "mean_episode_reward": float(np.mean(returns)) if returns else 0.0,
        }

    def to_bytes(self) -> bytes:
        rows = np.concatenate(
            [self.states, self.actions, self.rewards[:, None], self.next_states, self.kinds[:, None].astype(np.float32)],
            axis=1,
        ).astype("<f4")
        return _HEADER.pack(MAGIC, VERSION, OBS_DIM, ACTION_DIM, len(self)) + rows.tobytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> ExpertDataset:
        if len(buf) < 4 or buf[:4] != MAGIC:
            raise BadMagicError("bad magic: not a NAVD dataset")
        if len(buf) < _HEADER.size:
            raise TruncatedFileError("truncated header")
        _, version, sdim, adim, count = _HEADER.unpack_from(buf)
        if version != VERSION:
            raise VersionMismatchError(f"dataset version {version}, expected {VERSION}")
        if sdim != OBS_DIM or adim != ACTION_DIM:
            raise DimensionMismatchError(f"dimensions {sdim}/{adim}, expected {OBS_DIM}/{ACTION_DIM}")
        width = 2 * sdim + adim + 2
        need = _HEADER.size + count * width * 4
        if len(buf) < need:
            have = (len(buf) - _HEADER.size) // (width * 4)
            raise TruncatedFileError(f"truncated: header claims {count} records, {have} present")
        if len(buf) > need:
            raise DatasetFormatError("trailing bytes after last record")
        rows = np.frombuffer(buf, dtype="<f4", count=count * width, offset=_HEADER.size).reshape(count, width)
        rows = rows.astype(np.float32)
        s, a = sdim, sdim + adim
        return cls(rows[:, :s], rows[:, s:a], rows[:, a], rows[:, a + 1 : a + 1 + sdim], rows[:, -1].astype(np.uint8))


def write_dataset(dataset: ExpertDataset, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(dataset.to_bytes())


def read_dataset(path: str | os.PathLike) -> ExpertDataset:
    with open(path, "rb") as fh:
        return ExpertDataset.from_bytes(fh.read())
