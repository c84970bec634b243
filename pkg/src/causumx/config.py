from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Params:
    """Tuning knobs shared by the mining, estimation and selection steps."""

    k: int = 5
    theta: float = 0.75
    tau: float = 0.1
    sample_size: int = 1_000_000
    alpha: float = 0.05
    min_arm: int = 10
    bins: int = 5
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        if self.sample_size < 1:
            raise ConfigError("sample_size must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_arm < 1:
            raise ConfigError("min_arm must be >= 1")
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def derive_seed(seed: int, *parts: str) -> int:
    """Stable 64-bit seed from a run seed and text labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(p.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")
