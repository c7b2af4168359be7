from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class HyperParams:
    gamma: float = 0.99
    tau: float = 0.005
    lr: float = 3e-6
    batch_size: int = 256
    policy_delay: int = 2
    td3_target_noise: float = 0.2
    td3_noise_clip: float = 0.5
    exploration_noise: float = 0.1
    sac_alpha: float = 0.2
    per_alpha: float = 0.6
    per_beta0: float = 0.4
    per_eps: float = 1e-3
    expert_fraction_start: float = 0.5
    expert_fraction_end: float = 0.1
    buffer_capacity: int = 200_000
    warmup_steps: int = 1000
    sac_target_entropy_net: bool = False

    def __post_init__(self):
        # gamma = 0 is allowed: the discount-free target is a useful degenerate case
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.policy_delay < 1:
            raise ValueError("policy_delay must be >= 1")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        for name in ("expert_fraction_start", "expert_fraction_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.per_eps <= 0:
            raise ValueError("per_eps must be positive")
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be >= 0")

    def expert_fraction(self, step: int, total: int) -> float:
        """Linear schedule from the start to the end fraction over ``total`` steps."""
        frac = min(max(step / total, 0.0), 1.0) if total > 0 else 1.0
        return self.expert_fraction_start + (self.expert_fraction_end - self.expert_fraction_start) * frac

    def per_beta(self, step: int, total: int) -> float:
        frac = min(max(step / total, 0.0), 1.0) if total > 0 else 1.0
        return self.per_beta0 + (1.0 - self.per_beta0) * frac

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]
