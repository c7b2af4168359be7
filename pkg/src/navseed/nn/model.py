"""Actor/critic weight store for one agent, plus the ``NAVM`` model file.

File layout (little-endian): magic ``NAVM``, u32 version, u8 algorithm tag,
u8 has-target-actor flag, u16 reserved, u32 network count; for each network
u32 layer count and (rows, cols) u32 pairs; then every network's float32
weights and biases in declaration order. Networks are stored as actor,
critic Q1, critic Q2, [target actor], target Q1, target Q2.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .layers import Actor, Network, TwinCritic

ALGORITHMS = ("ddpg", "sac", "td3")
MAGIC = b"NAVM"
VERSION = 1


class ModelFormatError(ValueError):
    pass


class ArchitectureMismatchError(ModelFormatError):
    pass


@dataclass
class ModelParams:
    algo: str
    actor: Actor
    critic: TwinCritic
    target_actor: Actor | None
    target_critic: TwinCritic

    @classmethod
    def create(
        cls,
        algo: str,
        rng: np.random.Generator,
        obs_dim: int = 40,
        act_dim: int = 2,
        hidden: int = 256,
        dtype=np.float32,
        sac_target_actor: bool = False,
    ) -> ModelParams:
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}")
        actor = Actor(obs_dim, hidden, act_dim, stochastic=algo == "sac", dtype=dtype, rng=rng)
        critic = TwinCritic(obs_dim, act_dim, hidden, dtype, rng)
        target_actor = actor.copy() if (algo != "sac" or sac_target_actor) else None
        return cls(algo, actor, critic, target_actor, critic.copy())

    def networks(self) -> list[Network]:
        nets = [self.actor, self.critic.q1, self.critic.q2]
        if self.target_actor is not None:
            nets.append(self.target_actor)
        return nets + [self.target_critic.q1, self.target_critic.q2]

    def all_params(self) -> list[np.ndarray]:
        return [p for net in self.networks() for p in net.params]

    def copy(self) -> ModelParams:
        return ModelParams(
            self.algo,
            self.actor.copy(),
            self.critic.copy(),
            None if self.target_actor is None else self.target_actor.copy(),
            self.target_critic.copy(),
        )

    def to_bytes(self) -> bytes:
        nets = self.networks()
        out = [struct.pack("<4sIBBHI", MAGIC, VERSION, ALGORITHMS.index(self.algo), self.target_actor is not None, 0, len(nets))]
        for net in nets:
            out.append(struct.pack("<I", len(net.layer_shapes)))
            for rows, cols in net.layer_shapes:
                out.append(struct.pack("<II", rows, cols))
        for net in nets:
            for p in net.params:
                out.append(np.ascontiguousarray(p, dtype="<f4").tobytes())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, buf: bytes, expect_algo: str | None = None) -> ModelParams:
        if buf[:4] != MAGIC:
            raise ModelFormatError("bad magic: not a NAVM model")
        head = struct.Struct("<4sIBBHI")
        if len(buf) < head.size:
            raise ModelFormatError("truncated header")
        _, version, tag, has_ta, _, n_nets = head.unpack_from(buf)
        if version != VERSION:
            raise ModelFormatError(f"model version {version}, expected {VERSION}")
        if tag >= len(ALGORITHMS):
            raise ModelFormatError(f"unknown algorithm tag {tag}")
        algo = ALGORITHMS[tag]
        if expect_algo is not None and algo != expect_algo:
            raise ArchitectureMismatchError(f"model file holds a {algo} agent, expected {expect_algo}")
        off = head.size
        shapes = []
        try:
            for _ in range(n_nets):
                (n_layers,) = struct.unpack_from("<I", buf, off)
                off += 4
                layers = []
                for _ in range(n_layers):
                    layers.append(struct.unpack_from("<II", buf, off))
                    off += 8
                shapes.append(layers)
        except struct.error:
            raise ModelFormatError("truncated layer table") from None
        expected_nets = 6 if has_ta else 5
        if n_nets != expected_nets:
            raise ArchitectureMismatchError(f"{n_nets} networks stored, expected {expected_nets}")
        actor_shape = shapes[0]
        obs_dim, hidden = actor_shape[0]
        act_dim = actor_shape[-1][1] // (2 if algo == "sac" else 1)
        model = cls.create(algo, np.random.default_rng(0), obs_dim, act_dim, hidden, sac_target_actor=bool(has_ta))
        nets = model.networks()
        for net, layers in zip(nets, shapes):
            if [tuple(s) for s in layers] != [tuple(s) for s in net.layer_shapes]:
                raise ArchitectureMismatchError(f"layer shapes {layers} do not match {net.layer_shapes}")
        total = sum(p.size for net in nets for p in net.params)
        if len(buf) - off < total * 4:
            raise ModelFormatError("truncated weights")
        if len(buf) - off > total * 4:
            raise ModelFormatError("trailing bytes after weights")
        flat = np.frombuffer(buf, dtype="<f4", count=total, offset=off)
        k = 0
        for net in nets:
            for p in net.params:
                p[...] = flat[k : k + p.size].reshape(p.shape)
                k += p.size
        return model


def save_model(model: ModelParams, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(model.to_bytes())


def load_model(path: str | os.PathLike, expect_algo: str | None = None) -> ModelParams:
    with open(path, "rb") as fh:
        return ModelParams.from_bytes(fh.read(), expect_algo)


