import math

import numpy as np
import pytest

from cdenlab.f2lin import F2Subspace, F2Vec, dual, rref, sample_subspace
from cdenlab.statevec import (
    DensityMatrix,
    RegisterLayout,
    SparseState,
    apply_classical_isometry,
    apply_phase,
    basis_state,
    coset_state,
    density,
    hadamard,
    measure,
    measure_hadamard_pair,
    project_pure,
    random_state,
    subspace_pvm,
    trace_distance,
    ztwirl_mixture,
)

from _dense import coset_vector, phase_diag, proj_members, walsh

V = F2Vec.from_str


def span(*rows, n=None):
    return rref([V(r) for r in rows], ambient_dim=n)


def assert_state_close(st, expected: dict[int, complex], tol=1e-12):
    keys = set(st.amps) | set(expected)
    for k in keys:
        assert abs(st.amps.get(k, 0) - expected.get(k, 0)) <= tol, (
            f"label {k:b}: {st.amps.get(k, 0)} vs {expected.get(k, 0)}"
        )


def states_close(a: SparseState, b: SparseState, tol=1e-9) -> bool:
    keys = set(a.amps) | set(b.amps)
    return all(abs(a.amps.get(k, 0) - b.amps.get(k, 0)) <= tol for k in keys)


# --- layout ---------------------------------------------------------------


def test_layout_packing():
    lay = RegisterLayout([("A", 2), ("B", 3)])
    label = lay.pack({"A": 0b10, "B": 0b011})
    assert label == 0b10011
    assert lay.extract(label, "A") == 0b10
    assert lay.extract(label, "B") == 0b011
    assert lay.replace(label, "B", 0) == 0b10000
    assert lay.label_str(label) == "10|011"


def test_layout_validation():
    with pytest.raises(ValueError):
        RegisterLayout([("A", 2), ("A", 3)])
    with pytest.raises(ValueError):
        RegisterLayout([("A", 0)])


# --- coset states ----------------------------------------------------------


def test_coset_single_qubit():
    st = coset_state(span("1"), V("0"))
    r = 1 / math.sqrt(2)
    assert_state_close(st, {0: r, 1: r})


def test_coset_phase():
    st = coset_state(span("11"), V("10"))
    r = 1 / math.sqrt(2)
    assert_state_close(st, {0b00: r, 0b11: -r})


def test_coset_exclude_zero():
    st = coset_state(span("01", "10"), V("00"), exclude_zero=True)
    r = 1 / math.sqrt(3)
    assert_state_close(st, {0b01: r, 0b10: r, 0b11: r})


# --- classical isometry ----------------------------------------------------


def test_isometry_copy():
    lay = RegisterLayout([("X", 2), ("Y", 2)])
    st = coset_state(span("01", "10"), V("00"), layout=lay, reg="X")
    out = apply_classical_isometry(st, ["X"], "Y", lambda x: x)
    for label in out.amps:
        assert lay.extract(label, "X") == lay.extract(label, "Y")


def test_isometry_involution():
    lay = RegisterLayout([("X", 2), ("Y", 2)])
    st = coset_state(span("01", "10"), V("00"), layout=lay, reg="X")
    f = lambda x: (x * 3 + 1) & 0b11
    assert states_close(
        apply_classical_isometry(apply_classical_isometry(st, ["X"], "Y", f), ["X"], "Y", f),
        st,
        tol=1e-12,
    )


def test_isometry_and_gate():
    lay = RegisterLayout([("X", 2), ("Y", 1)])
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {lay.pack({"X": 0b00}): r, lay.pack({"X": 0b11}): r})
    out = apply_classical_isometry(st, ["X"], "Y", lambda x: (x >> 1) & x & 1)
    assert_state_close(
        out, {lay.pack({"X": 0b00, "Y": 0}): r, lay.pack({"X": 0b11, "Y": 1}): r}
    )


# --- phase ------------------------------------------------------------------


def test_phase_examples():
    st = coset_state(span("11"), V("00"))
    assert states_close(apply_phase(st, "A", V("00")), st, tol=1e-12)
    phased = apply_phase(st, "A", V("10"))
    r = 1 / math.sqrt(2)
    assert_state_close(phased, {0b00: r, 0b11: -r})
    assert states_close(apply_phase(phased, "A", V("10")), st, tol=1e-12)


# --- hadamard ----------------------------------------------------------------


def test_hadamard_zero_state():
    lay = RegisterLayout([("X", 3)])
    out = hadamard(basis_state(lay), "X")
    amp = 2.0 ** (-1.5)
    assert_state_close(out, {x: amp for x in range(8)})


def test_hadamard_involution_random():
    rng = np.random.default_rng(5)
    lay = RegisterLayout([("X", 4), ("Y", 2)])
    for _ in range(50):
        st = random_state(lay, rng, support=int(rng.integers(1, 9)))
        assert states_close(hadamard(hadamard(st, "X"), "X"), st, tol=1e-12)


def test_hadamard_subspace_to_dual():
    a = span("11")
    st = coset_state(a, V("00"))
    out = hadamard(st, "A")
    # dense oracle
    expect = walsh(2) @ st.to_dense()
    np.testing.assert_allclose(out.to_dense(), expect, atol=1e-12)
    # span{11} is self-dual
    assert states_close(out, coset_state(dual(a), V("00")))


def test_hadamard_width_cap():
    lay = RegisterLayout([("X", 16)])
    st = hadamard(basis_state(lay), "X")  # 1 term -> fine
    with pytest.raises(ValueError):
        hadamard(st, "X")  # 2^16 terms << 16 exceeds the budget


# --- measurement -------------------------------------------------------------


def test_measure_classical_register():
    lay = RegisterLayout([("X", 3)])
    st = basis_state(lay, {"X": 0b101})
    out = measure(st, "X", np.random.default_rng(0))
    assert out.outcome == V("101")
    assert out.prob == pytest.approx(1.0)
    assert states_close(out.post, st)
    assert not out.renormalized


def test_measure_bell_frequencies():
    lay = RegisterLayout([("X", 2)])
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {0b00: r, 0b11: r})
    rng = np.random.default_rng(99)
    wins = 0
    for _ in range(10_000):
        res = measure(st, "X", rng)
        assert res.prob == pytest.approx(0.5)
        assert abs(res.post.norm_sq() - 1.0) <= 1e-9
        if res.outcome == V("00"):
            wins += 1
    assert abs(wins / 10_000 - 0.5) <= 0.02


def test_measure_born_completeness():
    rng = np.random.default_rng(3)
    lay = RegisterLayout([("X", 3), ("Y", 2)])
    st = random_state(lay, rng, support=12)
    probs = {}
    for label, amp in st.amps.items():
        v = st.layout.extract(label, "X")
        probs[v] = probs.get(v, 0.0) + abs(amp) ** 2
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)


# --- projections --------------------------------------------------------------


def test_project_onto_self():
    st = coset_state(span("1010", "0101"), V("0110"))
    p, post = project_pure(st, ["A"], st)
    assert p == pytest.approx(1.0, abs=1e-12)
    assert states_close(post, st)


def test_project_plus_onto_zero():
    st = coset_state(span("1"), V("0"))
    zero = basis_state(RegisterLayout([("A", 1)]))
    p, post = project_pure(st, ["A"], zero)
    assert p == pytest.approx(0.5, abs=1e-12)
    assert states_close(post, zero)


def test_project_excluded_zero_onto_full_coset():
    full = rref([F2Vec(4, 1 << i) for i in range(4)])  # dim 4
    s = V("0110")
    st = coset_state(full, s, exclude_zero=True)
    phi = coset_state(full, s)
    p, _ = project_pure(st, ["A"], phi)
    assert p == pytest.approx(15 / 16, abs=1e-12)


def test_project_joint_registers():
    lay = RegisterLayout([("A", 1), ("B", 1)])
    r = 1 / math.sqrt(2)
    bell = SparseState(lay, {0b00: r, 0b11: r})
    p, post = project_pure(bell, ["A", "B"], bell)
    assert p == pytest.approx(1.0)
    plus_lay = RegisterLayout([("A", 1)])
    plus = SparseState(plus_lay, {0: r, 1: r})
    p, post = project_pure(bell, ["A"], plus)
    assert p == pytest.approx(0.5)
    # residual register B carries the conditional state (|0>+|1>)/sqrt(2)
    marg = density(post, ["B"])
    np.testing.assert_allclose(marg.mat, np.full((2, 2), 0.5), atol=1e-12)


# --- subspace PVM --------------------------------------------------------------


def test_pvm_eigenstate():
    a = span("1010", "0101")
    s = V("1001")
    st = coset_state(a, s)
    p, post = subspace_pvm(st, "A", a, s)
    assert p == pytest.approx(1.0, abs=1e-9)
    assert states_close(post, st)


def test_pvm_basis_element():
    a = span("1010", "0101")
    st = basis_state(RegisterLayout([("A", 4)]), {"A": 0b1111})
    p, _ = subspace_pvm(st, "A", a, V("0000"))
    assert p == pytest.approx(1 / 4, abs=1e-9)


def _all_dim2_subspaces():
    seen = set()
    for x in range(1, 16):
        for y in range(1, 16):
            s = rref([F2Vec(4, x), F2Vec(4, y)], ambient_dim=4)
            if s.dim == 2:
                seen.add(s)
    return sorted(seen, key=lambda s: s.basis)


def test_pvm_matches_project_pure_all_dim2():
    rng = np.random.default_rng(17)
    lay = RegisterLayout([("A", 4)])
    for sub in _all_dim2_subspaces():
        for _ in range(10):
            st = random_state(lay, rng)
            s = F2Vec.random(4, rng)
            p1, post1 = subspace_pvm(st, "A", sub, s)
            p2, post2 = project_pure(st, ["A"], coset_state(sub, s))
            assert abs(p1 - p2) <= 1e-9
            if post1 is not None and post2 is not None:
                assert states_close(post1, post2)


def test_pvm_dense_oracle():
    # Z_s H P_perp H P_A Z_s == |A_{0,s}><A_{0,s}| as a 16x16 matrix
    rng = np.random.default_rng(2)
    for sub in _all_dim2_subspaces()[:5]:
        s = F2Vec.random(4, rng)
        w = walsh(4)
        zs = phase_diag(4, s.val)
        lhs = zs @ w @ proj_members(4, dual(sub).enumerate()) @ w @ proj_members(
            4, sub.enumerate()
        ) @ zs
        v = coset_vector(sub, s)
        np.testing.assert_allclose(lhs, np.outer(v, v.conj()), atol=1e-9)


# --- density and trace distance -------------------------------------------------


def test_density_rank_one():
    lay = RegisterLayout([("X", 2)])
    st = basis_state(lay, {"X": 0b10})
    rho = density(st, ["X"])
    expect = np.zeros((4, 4))
    expect[2, 2] = 1.0
    np.testing.assert_allclose(rho.mat, expect, atol=1e-12)


def test_density_bell_half():
    lay = RegisterLayout([("X", 1), ("Y", 1)])
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {0b00: r, 0b11: r})
    rho = density(st, ["X"])
    np.testing.assert_allclose(rho.mat, np.eye(2) / 2, atol=1e-12)


def test_density_trace_one_random():
    rng = np.random.default_rng(11)
    lay = RegisterLayout([("X", 3), ("Y", 3)])
    for _ in range(100):
        st = random_state(lay, rng, support=int(rng.integers(1, 30)))
        rho = density(st, ["X"])
        assert rho.trace == pytest.approx(1.0, abs=1e-9)


def test_trace_distance_examples():
    zero = DensityMatrix(2, np.diag([1.0, 0.0]).astype(complex))
    one = DensityMatrix(2, np.diag([0.0, 1.0]).astype(complex))
    plus = DensityMatrix(2, np.full((2, 2), 0.5, dtype=complex))
    assert trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-12)
    assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)
    assert trace_distance(zero, plus) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


# --- z-twirl ----------------------------------------------------------------------


def test_ztwirl_phase_independent():
    lay = RegisterLayout([("X", 2)])
    st = basis_state(lay, {"X": 0b01})
    rho = ztwirl_mixture(lambda s: st, 2, ["X"])
    np.testing.assert_allclose(rho.mat, density(st, ["X"]).mat, atol=1e-12)


def test_ztwirl_two_point():
    lay = RegisterLayout([("X", 3)])
    r = 1 / math.sqrt(2)
    x0, x1 = 0b001, 0b110
    st = SparseState(lay, {x0: r, x1: r})
    rho = ztwirl_mixture(lambda s: apply_phase(st, "X", s), 3, ["X"])
    expect = np.zeros((8, 8))
    expect[x0, x0] = 0.5
    expect[x1, x1] = 0.5
    np.testing.assert_allclose(rho.mat, expect, atol=1e-12)


def test_ztwirl_random_states_match_diagonal_mixture():
    rng = np.random.default_rng(21)
    lay = RegisterLayout([("X", 4), ("R", 2)])
    for _ in range(10):
        st = random_state(lay, rng)
        avg = ztwirl_mixture(lambda s: apply_phase(st, "X", s), 4, ["X", "R"])
        vec = st.to_dense().reshape(16, 4)
        expect = np.zeros((64, 64), dtype=complex)
        for x in range(16):
            blk = np.zeros_like(vec)
            blk[x] = vec[x]
            flat = blk.reshape(-1)
            expect += np.outer(flat, flat.conj())
        assert trace_distance(avg, DensityMatrix(64, expect)) <= 1e-9


# --- unitarity invariant -------------------------------------------------------------


def test_operations_preserve_norm():
    rng = np.random.default_rng(31)
    lay = RegisterLayout([("X", 3), ("Y", 2)])
    for _ in range(30):
        st = random_state(lay, rng, support=int(rng.integers(1, 20)))
        assert apply_phase(st, "X", F2Vec.random(3, rng)).norm_sq() == pytest.approx(1.0, abs=1e-9)
        assert hadamard(st, "Y").norm_sq() == pytest.approx(1.0, abs=1e-9)
        f = lambda x: (x * 5 + 2) & 0b11
        assert apply_classical_isometry(st, ["X"], "Y", f).norm_sq() == pytest.approx(1.0, abs=1e-9)


# --- two-term Hadamard-measurement shortcut -----------------------------------------


def test_hadamard_pair_parity_and_uniformity():
    lay = RegisterLayout([("X", 4)])
    r = 1 / math.sqrt(2)
    u, v = 0b0011, 0b1100
    rng = np.random.default_rng(13)
    for c in (0, 1):
        st = SparseState(lay, {u: r, v: r * (-1) ** c})
        seen = {}
        for _ in range(4000):
            d = measure_hadamard_pair(st, rng)
            assert (d.val & (u ^ v)).bit_count() & 1 == c
            seen[d.val] = seen.get(d.val, 0) + 1
        assert len(seen) == 8  # the affine set has 2^(4-1) elements
        for count in seen.values():
            assert abs(count / 4000 - 1 / 8) <= 3 * (0.125 * 0.875 / 4000) ** 0.5


def test_hadamard_pair_collapsed_state_uniform():
    lay = RegisterLayout([("X", 3)])
    st = basis_state(lay, {"X": 0b101})
    rng = np.random.default_rng(8)
    seen = set()
    for _ in range(2000):
        seen.add(measure_hadamard_pair(st, rng).val)
    assert seen == set(range(8))


def test_hadamard_pair_matches_full_transform():
    # shortcut distribution == dense Hadamard Born distribution
    lay = RegisterLayout([("X", 3)])
    r = 1 / math.sqrt(2)
    u, v = 0b001, 0b111
    st = SparseState(lay, {u: r, v: -r})
    dense_probs = np.abs(walsh(3) @ st.to_dense()) ** 2
    rng = np.random.default_rng(55)
    counts = np.zeros(8)
    n = 8000
    for _ in range(n):
        counts[measure_hadamard_pair(st, rng).val] += 1
    for x in range(8):
        assert abs(counts[x] / n - dense_probs[x]) <= 0.03


# --- dump format ---------------------------------------------------------------------


def test_dump_format():
    lay = RegisterLayout([("A", 2), ("B", 1)])
    r = 1 / math.sqrt(2)
    st = SparseState(lay, {lay.pack({"A": 0b10, "B": 1}): r, lay.pack({"A": 0b01, "B": 0}): -r})
    lines = st.dump().splitlines()
    assert lines[0].startswith("01|0(")
    assert lines[1].startswith("10|1(")
