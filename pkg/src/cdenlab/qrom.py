"""Simulated quantum random oracle: seeded tables, reprogramming overlays,
coherent queries, and query-weight instrumentation.

Oracle outputs come from a keyed hash of (seed, input), so 64-bit input
spaces are supported lazily while staying exactly reproducible. Views wrap
a base oracle with a point-map, a swap pair, or a fixed input prefix; views
stack and agree with the base outside the overlay's affected inputs.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .f2lin import F2Vec
from . import statevec
from .statevec import SparseState

__all__ = [
    "OracleTable",
    "OracleView",
    "PointMap",
    "Swap",
    "Prefix",
    "oracle_new",
    "reprogram",
    "coherent_query",
    "QueryTrace",
    "TracedOracle",
    "query_weight",
    "extract_by_random_query",
    "prf_split_check",
    "PrfReport",
    "oracle_spec",
    "oracle_from_spec",
]

TRACE_SNAPSHOT_MAX_TERMS = 1 << 10


class OracleTable:
    """A seeded random function {0,1}^in_bits -> {0,1}^out_bits."""

    def __init__(self, seed: int, in_bits: int, out_bits: int):
        if not 1 <= in_bits <= 64 or not 1 <= out_bits <= 64:
            raise ValueError("oracle width caps are 64 bits")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.in_bits = in_bits
        self.out_bits = out_bits
        self._key = self.seed.to_bytes(8, "big")

    def query(self, x: int) -> int:
        if not 0 <= x < (1 << self.in_bits):
            raise ValueError(f"query {x} outside {self.in_bits}-bit input space")
        digest = hashlib.blake2b(
            x.to_bytes(8, "big"), key=self._key, digest_size=8
        ).digest()
        return int.from_bytes(digest, "big") >> (64 - self.out_bits)

    __call__ = query

    def __repr__(self) -> str:
        return f"OracleTable(seed={self.seed:#x}, in={self.in_bits}, out={self.out_bits})"


def oracle_new(seed: int, in_bits: int, out_bits: int) -> OracleTable:
    return OracleTable(seed, in_bits, out_bits)


@dataclass(frozen=True)
class PointMap:
    """Overlay replacing finitely many input points."""

    entries: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, mapping: dict[int, int]) -> "PointMap":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)


@dataclass(frozen=True)
class Swap:
    """Overlay exchanging the outputs at two input points."""

    a: int
    b: int


@dataclass(frozen=True)
class Prefix:
    """Overlay fixing the leading `bits` input bits to `value`."""

    value: int
    bits: int


class OracleView:
    """An oracle derived from a base by one overlay; stacks freely."""

    def __init__(self, base, overlay):
        self.base = base
        self.overlay = overlay
        self.out_bits = base.out_bits
        if isinstance(overlay, PointMap):
            self.in_bits = base.in_bits
            self._map = overlay.as_dict()
            for x, y in self._map.items():
                if not 0 <= x < (1 << base.in_bits):
                    raise ValueError("point-map input outside base input space")
                if not 0 <= y < (1 << base.out_bits):
                    raise ValueError("point-map output outside base output space")
        elif isinstance(overlay, Swap):
            self.in_bits = base.in_bits
            for v in (overlay.a, overlay.b):
                if not 0 <= v < (1 << base.in_bits):
                    raise ValueError("swap point outside base input space")
        elif isinstance(overlay, Prefix):
            if overlay.bits >= base.in_bits:
                raise ValueError("prefix consumes the whole input")
            if not 0 <= overlay.value < (1 << overlay.bits):
                raise ValueError("prefix value wider than declared")
            self.in_bits = base.in_bits - overlay.bits
        else:
            raise TypeError(f"unknown overlay type {type(overlay).__name__}")

    def query(self, x: int) -> int:
        if not 0 <= x < (1 << self.in_bits):
            raise ValueError(f"query {x} outside {self.in_bits}-bit input space")
        ov = self.overlay
        if isinstance(ov, PointMap):
            hit = self._map.get(x)
            return hit if hit is not None else self.base.query(x)
        if isinstance(ov, Swap):
            if x == ov.a:
                return self.base.query(ov.b)
            if x == ov.b:
                return self.base.query(ov.a)
            return self.base.query(x)
        return self.base.query((ov.value << self.in_bits) | x)

    __call__ = query


def reprogram(base, overlay) -> OracleView:
    """Stack a point-map, swap, or prefix overlay onto an oracle."""
    return OracleView(base, overlay)


def coherent_query(st: SparseState, in_reg: str, out_reg: str, oracle) -> SparseState:
    """The oracle unitary |x>|b> -> |x>|b xor O(x)> on the named registers."""
    if st.layout.width(in_reg) != oracle.in_bits:
        raise ValueError("input register width differs from oracle input width")
    if st.layout.width(out_reg) != oracle.out_bits:
        raise ValueError("output register width differs from oracle output width")
    return statevec.apply_classical_isometry(st, [in_reg], out_reg, oracle.query)


@dataclass
class QueryRecord:
    index: int
    weights: Optional[dict[int, float]]  # marginal on the query register
    set_weight: Optional[float]  # weight on the target set, if one was given


@dataclass
class QueryTrace:
    """Per-query snapshots of the query register's computational marginal."""

    records: list[QueryRecord] = field(default_factory=list)

    def record(
        self, st: SparseState, in_reg: str, target_set: Optional[set[int]] = None
    ) -> None:
        layout = st.layout
        t = len(self.records) + 1
        if len(st.amps) <= TRACE_SNAPSHOT_MAX_TERMS:
            weights: dict[int, float] = {}
            for label, amp in st.amps.items():
                x = layout.extract(label, in_reg)
                weights[x] = weights.get(x, 0.0) + abs(amp) ** 2
            sw = None
            if target_set is not None:
                sw = sum(w for x, w in weights.items() if x in target_set)
            self.records.append(QueryRecord(t, weights, sw))
        else:
            sw = 0.0
            if target_set is not None:
                for label, amp in st.amps.items():
                    if layout.extract(label, in_reg) in target_set:
                        sw += abs(amp) ** 2
            self.records.append(QueryRecord(t, None, sw))

    @property
    def query_count(self) -> int:
        return len(self.records)


class TracedOracle:
    """Oracle handle that records the query register before each query."""

    def __init__(self, oracle, trace: QueryTrace | None = None,
                 target_set: Optional[set[int]] = None):
        self.oracle = oracle
        self.trace = trace if trace is not None else QueryTrace()
        self.target_set = target_set

    def query(self, st: SparseState, in_reg: str, out_reg: str) -> SparseState:
        self.trace.record(st, in_reg, self.target_set)
        return coherent_query(st, in_reg, out_reg, self.oracle)


def query_weight(trace: QueryTrace, S: set[int]) -> float:
    """Total squared query amplitude on the set S across all queries."""
    total = 0.0
    for rec in trace.records:
        if rec.weights is not None:
            total += sum(w for x, w in rec.weights.items() if x in S)
        elif rec.set_weight is not None:
            total += rec.set_weight
        else:
            raise ValueError("trace record carries neither weights nor a set weight")
    return total


class _Halt(Exception):
    def __init__(self, result):
        self.result = result


class _HaltingOracle:
    """Wrapper that measures the query register at a chosen query index."""

    def __init__(self, oracle, stop_at: int, rng: np.random.Generator):
        self.oracle = oracle
        self.stop_at = stop_at
        self.rng = rng
        self.count = 0

    def query(self, st: SparseState, in_reg: str, out_reg: str) -> SparseState:
        self.count += 1
        if self.count == self.stop_at:
            outcome, _, _, _ = statevec.measure(st, in_reg, self.rng)
            x = outcome.val
            raise _Halt((x, self.oracle.query(x)))
        return coherent_query(st, in_reg, out_reg, self.oracle)


def extract_by_random_query(
    algorithm: Callable[[SparseState, object], object],
    input_state: SparseState,
    oracle,
    max_queries: int,
    rng: np.random.Generator,
) -> Optional[tuple[int, int]]:
    """Halt the algorithm at a uniform query index and measure its query.

    Returns (x, O(x)), or None when the algorithm finished before the
    chosen index (in particular, when it made no queries at all).
    """
    if max_queries < 1:
        return None
    stop_at = int(rng.integers(1, max_queries + 1))
    handle = _HaltingOracle(oracle, stop_at, rng)
    try:
        algorithm(input_state, handle)
    except _Halt as h:
        return h.result
    return None


@dataclass
class PrfReport:
    """Functional sanity comparison of H(k || .) against a fresh table."""

    probes: int
    bit_balance_split: list[float]
    bit_balance_fresh: list[float]
    collisions_split: int
    collisions_fresh: int
    balance_ok: bool
    collisions_ok: bool

    @property
    def ok(self) -> bool:
        return self.balance_ok and self.collisions_ok


def prf_split_check(
    H: OracleTable, k: F2Vec, probes: int, rng: np.random.Generator
) -> PrfReport:
    """Compare the split oracle H(k || .) with an independent fresh table.

    Bit balance and birthday-collision counts must agree within 3 sigma.
    Not a security proof; a plumbing sanity check.
    """
    suffix_bits = H.in_bits - k.n
    if suffix_bits < 1:
        raise ValueError("key consumes the whole oracle input")
    if probes == 0:
        return PrfReport(0, [], [], 0, 0, True, True)
    fresh = OracleTable(int(rng.integers(1 << 62)), suffix_bits, H.out_bits)
    from .f2lin import rand_bits

    if suffix_bits <= 24:
        if probes > (1 << suffix_bits):
            raise ValueError("more probes than distinct suffixes")
        # distinct suffixes, so output collisions follow the birthday estimate
        suffixes = rng.choice(1 << suffix_bits, size=probes, replace=False)
    else:
        suffixes = [rand_bits(rng, suffix_bits) for _ in range(probes)]
    split_vals = []
    fresh_vals = []
    for v in suffixes:
        v = int(v)
        split_vals.append(H.query((k.val << suffix_bits) | v))
        fresh_vals.append(fresh.query(v))

    m = H.out_bits
    sigma = (0.25 / probes) ** 0.5
    bal_split = [
        sum((v >> (m - 1 - j)) & 1 for v in split_vals) / probes for j in range(m)
    ]
    bal_fresh = [
        sum((v >> (m - 1 - j)) & 1 for v in fresh_vals) / probes for j in range(m)
    ]
    balance_ok = all(abs(b - 0.5) <= 3 * sigma for b in bal_split + bal_fresh)

    from collections import Counter

    def pairwise_collisions(vals):
        return sum(c * (c - 1) // 2 for c in Counter(vals).values())

    col_split = pairwise_collisions(split_vals)
    col_fresh = pairwise_collisions(fresh_vals)
    expected = probes * (probes - 1) / 2 / (1 << m)
    col_sigma = max(expected, 1.0) ** 0.5
    collisions_ok = (
        abs(col_split - expected) <= 3 * col_sigma
        and abs(col_fresh - expected) <= 3 * col_sigma
    )
    return PrfReport(
        probes, bal_split, bal_fresh, col_split, col_fresh, balance_ok, collisions_ok
    )


def oracle_spec(oracle) -> dict:
    """JSON-ready description: base table plus overlays in application order."""
    overlays = []
    node = oracle
    while isinstance(node, OracleView):
        ov = node.overlay
        if isinstance(ov, PointMap):
            overlays.append(
                {
                    "type": "point",
                    "entries": {format(x, "x"): format(y, "x") for x, y in ov.entries},
                }
            )
        elif isinstance(ov, Swap):
            overlays.append({"type": "swap", "a": format(ov.a, "x"), "b": format(ov.b, "x")})
        else:
            overlays.append({"type": "prefix", "value": format(ov.value, "x"), "bits": ov.bits})
        node = node.base
    overlays.reverse()
    return {
        "seed": node.seed,
        "in_bits": node.in_bits,
        "out_bits": node.out_bits,
        "overlays": overlays,
    }


def oracle_from_spec(spec: dict):
    oracle = OracleTable(spec["seed"], spec["in_bits"], spec["out_bits"])
    for ov in spec["overlays"]:
        if ov["type"] == "point":
            overlay = PointMap.of({int(x, 16): int(y, 16) for x, y in ov["entries"].items()})
        elif ov["type"] == "swap":
            overlay = Swap(int(ov["a"], 16), int(ov["b"], 16))
        elif ov["type"] == "prefix":
            overlay = Prefix(int(ov["value"], 16), ov["bits"])
        else:
            raise ValueError(f"unknown overlay type {ov['type']!r}")
        oracle = OracleView(oracle, overlay)
    return oracle
