import math

import numpy as np
import pytest

from cdenlab.f2lin import F2Vec
from cdenlab.qrom import (
    OracleTable,
    PointMap,
    Prefix,
    QueryTrace,
    Swap,
    TracedOracle,
    coherent_query,
    extract_by_random_query,
    oracle_from_spec,
    oracle_new,
    oracle_spec,
    prf_split_check,
    query_weight,
    reprogram,
)
from cdenlab.statevec import RegisterLayout, SparseState, basis_state


# --- tables -----------------------------------------------------------------


def test_oracle_deterministic():
    h = oracle_new(0xDEAD, 16, 8)
    assert all(h.query(x) == h.query(x) for x in (0, 1, 77, 65535))


def test_distinct_seeds_mostly_differ():
    h1 = oracle_new(1, 16, 16)
    h2 = oracle_new(2, 16, 16)
    matches = sum(h1.query(x) == h2.query(x) for x in range(10_000))
    # expected collisions = 10^4 * 2^-16 ~ 0.15
    assert matches <= 4


def test_output_bit_balance():
    h = oracle_new(3, 16, 16)
    n = 10_000
    for j in range(16):
        ones = sum((h.query(x) >> j) & 1 for x in range(n))
        assert abs(ones / n - 0.5) <= 0.02


def test_width_caps():
    with pytest.raises(ValueError):
        oracle_new(0, 65, 8)
    with pytest.raises(ValueError):
        oracle_new(0, 8, 0)
    h = oracle_new(0, 8, 8)
    with pytest.raises(ValueError):
        h.query(256)


# --- overlays -----------------------------------------------------------------


def test_empty_pointmap_is_base():
    h = oracle_new(5, 12, 8)
    v = reprogram(h, PointMap.of({}))
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = int(rng.integers(0, 1 << 12))
        assert v.query(x) == h.query(x)


def test_swap_exhaustive():
    h = oracle_new(6, 6, 8)
    a, b = 0b000101, 0b110000
    v = reprogram(h, Swap(a, b))
    for x in range(64):
        if x == a:
            assert v.query(x) == h.query(b)
        elif x == b:
            assert v.query(x) == h.query(a)
        else:
            assert v.query(x) == h.query(x)


def test_swap_involution_stacked():
    h = oracle_new(7, 8, 8)
    v = reprogram(reprogram(h, Swap(3, 200)), Swap(3, 200))
    assert all(v.query(x) == h.query(x) for x in range(256))


def test_prefix_definition():
    h = oracle_new(8, 10, 8)
    v = reprogram(h, Prefix(0b1011, 4))
    assert v.in_bits == 6
    for w in range(64):
        assert v.query(w) == h.query((0b1011 << 6) | w)


def test_pointmap_locality_exhaustive():
    h = oracle_new(9, 8, 8)
    mapping = {5: 17, 200: 3}
    v = reprogram(h, PointMap.of(mapping))
    for x in range(256):
        assert v.query(x) == mapping.get(x, h.query(x))


def test_views_stack():
    h = oracle_new(10, 8, 8)
    v = reprogram(reprogram(h, PointMap.of({1: 42})), Swap(1, 2))
    assert v.query(2) == 42
    assert v.query(1) == h.query(2)


def test_spec_roundtrip():
    h = oracle_new(11, 10, 8)
    v = reprogram(reprogram(reprogram(h, PointMap.of({7: 9})), Swap(1, 2)), Prefix(0b10, 2))
    spec = oracle_spec(v)
    assert [o["type"] for o in spec["overlays"]] == ["point", "swap", "prefix"]
    rebuilt = oracle_from_spec(spec)
    assert all(rebuilt.query(x) == v.query(x) for x in range(256))


# --- coherent queries -----------------------------------------------------------


def _query_layout(h):
    return RegisterLayout([("W", 1), ("X", h.in_bits), ("B", h.out_bits)])


def test_coherent_query_classical():
    h = oracle_new(12, 4, 4)
    lay = _query_layout(h)
    st = basis_state(lay, {"X": 9})
    out = coherent_query(st, "X", "B", h)
    (label,) = out.amps
    assert lay.extract(label, "B") == h.query(9)


def test_coherent_query_involution():
    h = oracle_new(13, 4, 4)
    lay = _query_layout(h)
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {lay.pack({"X": 3}): r, lay.pack({"X": 12}): r})
    out = coherent_query(coherent_query(st, "X", "B", h), "X", "B", h)
    assert set(out.amps) == set(st.amps)


def test_coherent_query_superposition():
    h = oracle_new(14, 4, 4)
    lay = _query_layout(h)
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {lay.pack({"X": 3}): r, lay.pack({"X": 12}): r})
    out = coherent_query(st, "X", "B", h)
    expect = {
        lay.pack({"X": 3, "B": h.query(3)}): r,
        lay.pack({"X": 12, "B": h.query(12)}): r,
    }
    assert {k: pytest.approx(v) for k, v in out.amps.items()} == expect


# --- query weight ---------------------------------------------------------------


def test_query_weight_examples():
    h = oracle_new(15, 4, 4)
    lay = _query_layout(h)
    handle = TracedOracle(h)
    st = basis_state(lay, {"X": 2})
    st = handle.query(st, "X", "B")
    assert query_weight(handle.trace, {5, 9}) == pytest.approx(0.0)
    assert query_weight(handle.trace, {2}) == pytest.approx(1.0)

    handle2 = TracedOracle(h)
    r = 1 / math.sqrt(2)
    sup = SparseState(lay, {lay.pack({"X": 2}): r, lay.pack({"X": 7}): r})
    handle2.query(sup, "X", "B")
    assert query_weight(handle2.trace, {2}) == pytest.approx(0.5)


# --- extraction ------------------------------------------------------------------


def test_extract_single_classical_query():
    h = oracle_new(16, 4, 4)
    lay = _query_layout(h)

    def algo(st, oracle):
        return oracle.query(st, "X", "B")

    st = basis_state(lay, {"X": 5})
    rng = np.random.default_rng(4)
    out = extract_by_random_query(algo, st, h, 1, rng)
    assert out == (5, h.query(5))


def test_extract_two_queries_half_rate():
    h = oracle_new(17, 4, 4)
    lay = _query_layout(h)
    S = {5}

    def algo(st, oracle):
        st = oracle.query(st, "X", "B")  # query 1 on 5 (in S)
        st = apply_x = SparseState(st.layout, st.amps)  # no-op step
        st2 = basis_state(lay, {"X": 9})
        return oracle.query(st2, "X", "B")  # query 2 off S

    st = basis_state(lay, {"X": 5})
    rng = np.random.default_rng(6)
    hits = 0
    n = 2000
    for _ in range(n):
        out = extract_by_random_query(algo, st, h, 2, rng)
        if out is not None and out[0] in S:
            hits += 1
    rate = hits / n
    assert rate >= 0.25  # qw/T^2 = 1/4
    assert abs(rate - 0.5) <= 3 * (0.25 / n) ** 0.5


def test_extract_zero_queries():
    h = oracle_new(18, 4, 4)
    lay = _query_layout(h)
    st = basis_state(lay)
    out = extract_by_random_query(lambda st, o: st, st, h, 3, np.random.default_rng(0))
    assert out is None


# --- PRF split check ----------------------------------------------------------------


def test_prf_split_empty():
    h = oracle_new(19, 16, 8)
    rep = prf_split_check(h, F2Vec.from_str("10110011"), 0, np.random.default_rng(0))
    assert rep.ok and rep.probes == 0


def test_prf_split_deterministic_per_input():
    h = oracle_new(20, 16, 8)
    k = F2Vec.from_str("10110011")
    assert h.query((k.val << 8) | 7) == h.query((k.val << 8) | 7)


def test_prf_split_balance_at_spec_scale():
    h = oracle_new(21, 24, 16)
    k = F2Vec(8, 0xA5)
    rep = prf_split_check(h, k, 10_000, np.random.default_rng(3))
    assert rep.balance_ok
    for b in rep.bit_balance_split:
        assert abs(b - 0.5) <= 0.02


def test_prf_split_report_ok_moderate_load():
    h = oracle_new(22, 24, 16)
    k = F2Vec(8, 0x3C)
    rep = prf_split_check(h, k, 4096, np.random.default_rng(4))
    assert rep.ok
