"""Monte Carlo bookkeeping: seed derivation, Wilson intervals, reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["derive_rng", "wilson_interval", "GameStats", "BoundReport"]

BOUND_TOL = 1e-9


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Independent stream for (master_seed, path); trials are order-free."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=path))


def wilson_interval(wins: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = wins / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class GameStats:
    """Outcome record of one Monte Carlo security game."""

    game: str
    params: dict
    trials: int
    wins: int
    seed: int
    per_trial: Optional[list[int]] = None  # 0/1 per trial, for CSV projection
    extra: dict = field(default_factory=dict)

    @property
    def estimate(self) -> float:
        return self.wins / self.trials if self.trials else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.wins, self.trials)

    def to_json(self) -> dict:
        lo, hi = self.ci95
        out = {
            "game": self.game,
            "params": self.params,
            "trials": self.trials,
            "wins": self.wins,
            "estimate": self.estimate,
            "ci95": [lo, hi],
            "seed": self.seed,
            # measured timing is kept out of reports so that reruns with the
            # same seed stay byte-identical
            "wall_time_ms": None,
        }
        if self.extra:
            out["extra"] = self.extra
        return out

    def summary_line(self) -> str:
        lo, hi = self.ci95
        return (
            f"game={self.game} estimate={self.estimate:.6g} "
            f"ci95=[{lo:.6g},{hi:.6g}] trials={self.trials}"
        )


@dataclass
class BoundReport:
    """One checked inequality instance: lhs <= rhs up to tolerance."""

    instance: str
    lhs: float
    rhs: float
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -BOUND_TOL

    def to_json(self) -> dict:
        out = {
            "instance": self.instance,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
        }
        if self.extra:
            out["extra"] = self.extra
        return out
