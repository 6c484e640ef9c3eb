"""Security-game harnesses, adversary strategies, and numerical lemma suites."""

from .stats import BoundReport, GameStats, derive_rng, wilson_interval

__all__ = ["BoundReport", "GameStats", "derive_rng", "wilson_interval"]
