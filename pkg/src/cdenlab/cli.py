"""Batch experiment runner and lemma-verification front end.

Two subcommands: ``lemmas`` runs the numerical verification suites and
fails (exit 1) on any bound violation; ``experiment`` runs one security
game and writes its statistics. Reports are JSON (canonical) or CSV (a
row-per-trial projection); reruns with the same seed are byte-identical,
which is why measured wall time is reported on stderr but pinned to null
inside report files.

Exit codes: 0 success, 1 violation, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .games.harness import (
    dph_game,
    evidence_collection_demo,
    run_adp_del,
    run_deniability_pair,
    run_double_extraction,
    run_soundness_game,
)
from .games.lemmas import LEMMA_SUITES, run_lemma_suite
from .games.stats import GameStats
from .games.strategies import (
    ADP_DEL_STRATEGIES,
    DENIABILITY_ADVERSARIES,
    DOUBLE_EXT_STRATEGIES,
    DPH_STRATEGIES,
    SOUNDNESS_ADVERSARIES,
    SOUNDNESS_VERIFIERS,
)
from .sig_cden import OTParams, OTScheme

DEFAULT_SEED = 0xC0DE

GAMES = ("adp-del", "double-ext", "dph", "soundness", "deniability", "evidence-demo")
SCHEMES = ("fs-nizk", "fs-sig")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    game: Optional[str] = None
    lemma: Optional[str] = None
    scheme: Optional[str] = None
    strategy: Optional[str] = None
    verifier: Optional[str] = None
    lam: int = 8
    lam_x: int = 8
    reps: int = 6
    trials: int = 1000
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    fmt: str = "json"

    def validate(self) -> None:
        if self.lam % 2 != 0 or not 2 <= self.lam <= 12:
            raise UsageError("--lambda must be even and within [2, 12]")
        if not 1 <= self.lam_x <= 16:
            raise UsageError("--lambda-x must be within [1, 16]")
        if not 1 <= self.reps <= 16:
            raise UsageError("--reps must be within [1, 16]")
        if not 1 <= self.trials <= 1_000_000:
            raise UsageError("--trials must be within [1, 1000000]")
        if self.fmt not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        if self.command == "experiment":
            if self.game not in GAMES:
                raise UsageError(f"--game must be one of {', '.join(GAMES)}")
            if self.game == "deniability" and self.scheme not in SCHEMES:
                raise UsageError(f"--scheme must be one of {', '.join(SCHEMES)}")
        if self.command == "lemmas" and self.lemma is not None:
            if self.lemma not in LEMMA_SUITES:
                raise UsageError(
                    f"--lemma must be one of {', '.join(sorted(LEMMA_SUITES))}"
                )

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _pick(table: dict, name: Optional[str], default: str, what: str):
    key = name or default
    if key not in table:
        raise UsageError(f"unknown {what} {key!r}; choose from {', '.join(sorted(table))}")
    return table[key]


def _report(config: RunConfig, results: list) -> dict:
    return {
        "tool_version": __version__,
        "config": config.to_json(),
        "results": results,
        "wall_time_ms": None,
    }


def _emit(config: RunConfig, report: dict, csv_rows: Optional[list[str]] = None) -> None:
    if config.fmt == "csv" and csv_rows is not None:
        text = "\n".join(csv_rows) + "\n"
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if config.out:
        with open(config.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_lemmas(config: RunConfig) -> int:
    """Run the verification suites; exit 0 only with zero violations."""
    config.validate()
    t0 = time.monotonic()
    suite_ids = [config.lemma] if config.lemma else list(LEMMA_SUITES)
    results = []
    csv_rows = ["lemma_id,instance,lhs,rhs,slack,holds"]
    total_violations = 0
    for lemma_id in suite_ids:
        reports = run_lemma_suite(lemma_id, config.seed)
        violations = [r for r in reports if not r.holds]
        total_violations += len(violations)
        worst = min((r.slack for r in reports), default=0.0)
        results.append(
            {
                "lemma_id": lemma_id,
                "instances": len(reports),
                "violations": len(violations),
                "max_violation": max(0.0, -worst),
            }
        )
        for r in reports:
            csv_rows.append(
                f"{lemma_id},{r.instance},{r.lhs!r},{r.rhs!r},{r.slack!r},{int(r.holds)}"
            )
    report = _report(config, results)
    _emit(config, report, csv_rows)
    elapsed = (time.monotonic() - t0) * 1000
    print(
        f"lemmas: {len(suite_ids)} suites, {total_violations} violations "
        f"({elapsed:.0f} ms)",
        file=sys.stderr,
    )
    return 0 if total_violations == 0 else 1


def _run_game(config: RunConfig) -> tuple[GameStats | dict, list[str]]:
    game = config.game
    if game == "adp-del":
        strat = _pick(ADP_DEL_STRATEGIES, config.strategy, "computational", "strategy")
        stats = run_adp_del(strat, config.lam_x, config.reps, config.trials, config.seed)
    elif game == "double-ext":
        strat = _pick(DOUBLE_EXT_STRATEGIES, config.strategy, "measure-and-guess", "strategy")
        stats = run_double_extraction(strat, config.lam_x, config.trials, config.seed)
    elif game == "dph":
        strat = _pick(DPH_STRATEGIES, config.strategy, "measure-computational", "strategy")
        stats = dph_game(strat, config.lam, config.trials, config.seed)
    elif game == "soundness":
        adv = _pick(SOUNDNESS_ADVERSARIES, config.strategy, "replay", "strategy")
        ver = _pick(SOUNDNESS_VERIFIERS, config.verifier, "honest", "verifier")
        scheme = OTScheme.create(
            OTParams(lam_x=config.lam_x, ell=config.reps, msg_bits=8),
            config.seed ^ 0x4F54,
        )
        stats = run_soundness_game(ver, adv, scheme, config.trials, config.seed)
    elif game == "deniability":
        adv = _pick(DENIABILITY_ADVERSARIES, config.strategy, "honest-deleter", "strategy")
        wins = 0
        per_trial = []
        first = None
        real_probs, sim_probs = [], []
        for t in range(config.trials):
            real, sim = run_deniability_pair(config.scheme, adv, config.lam, config.seed + t)
            if first is None:
                first = (real, sim)
            real_probs.append(real.accept_prob)
            sim_probs.append(sim.accept_prob)
            win = 1 if sim.accepted else 0
            wins += win
            per_trial.append(win)
        stats = GameStats(
            "deniability",
            {"scheme": config.scheme, "lam": config.lam},
            config.trials,
            wins,
            config.seed,
            per_trial,
            {
                "strategy": adv.name,
                "real_accept_prob_mean": sum(real_probs) / len(real_probs),
                "sim_accept_prob_mean": sum(sim_probs) / len(sim_probs),
                "first_real": first[0].to_json(),
                "first_sim": first[1].to_json(),
            },
        )
    elif game == "evidence-demo":
        demo = evidence_collection_demo(config.seed, trials=config.trials, lam=config.lam)
        stats = GameStats(
            "evidence-demo",
            {"lam": config.lam},
            config.trials,
            int(round(demo["strawman_advantage"] * config.trials)),
            config.seed,
            None,
            demo,
        )
    else:  # pragma: no cover - guarded by validate()
        raise UsageError(f"unknown game {game!r}")

    csv_rows = ["trial,win"]
    if isinstance(stats, GameStats) and stats.per_trial:
        csv_rows += [f"{i},{w}" for i, w in enumerate(stats.per_trial)]
    return stats, csv_rows


def cmd_experiment(config: RunConfig) -> int:
    """Run one security game and write its statistics."""
    config.validate()
    t0 = time.monotonic()
    stats, csv_rows = _run_game(config)
    report = _report(config, [stats.to_json()])
    _emit(config, report, csv_rows)
    elapsed = (time.monotonic() - t0) * 1000
    print(stats.summary_line() + f" ({elapsed:.0f} ms)", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdenlab",
        description="certified-deniability simulator: security games and lemma checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--lambda", dest="lam", type=int, default=8,
                       help="subspace ambient dimension (even, <= 12)")
        p.add_argument("--lambda-x", dest="lam_x", type=int, default=8,
                       help="hidden string width for BB84-style games")
        p.add_argument("--reps", type=int, default=6, help="index count / repetitions")
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None, help="report path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")

    pl = sub.add_parser("lemmas", help="run the numerical lemma suites")
    pl.add_argument("--lemma", type=str, default=None,
                    help="run a single suite instead of all")
    common(pl)

    pe = sub.add_parser("experiment", help="run one security game")
    pe.add_argument("--game", type=str, required=True, help=", ".join(GAMES))
    pe.add_argument("--scheme", type=str, default=None, help=", ".join(SCHEMES))
    pe.add_argument("--strategy", type=str, default=None)
    pe.add_argument("--verifier", type=str, default=None,
                    help="soundness game verifier (honest, always-accept)")
    common(pe)
    return parser


def _default_seed() -> int:
    env = os.environ.get("CDENLAB_SEED")
    if env is not None:
        try:
            return int(env, 0)
        except ValueError as e:
            raise UsageError(f"CDENLAB_SEED is not an integer: {env!r}") from e
    return DEFAULT_SEED


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        seed = ns.seed if ns.seed is not None else _default_seed()
        config = RunConfig(
            command=ns.command,
            game=getattr(ns, "game", None),
            lemma=getattr(ns, "lemma", None),
            scheme=getattr(ns, "scheme", None),
            strategy=getattr(ns, "strategy", None),
            verifier=getattr(ns, "verifier", None),
            lam=ns.lam,
            lam_x=ns.lam_x,
            reps=ns.reps,
            trials=ns.trials,
            seed=seed,
            out=ns.out,
            fmt=ns.fmt,
        )
        if ns.command == "lemmas":
            return cmd_lemmas(config)
        return cmd_experiment(config)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
