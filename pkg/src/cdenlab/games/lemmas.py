"""Numerical verification suites for the supporting lemmas.

Each suite builds randomized desk-scale instances, computes both sides of
the stated inequality (or both sides of an exact identity) by independent
means, and emits one BoundReport per checked instance. Exact quantities come
from dense linear algebra; Monte Carlo enters only where a lemma speaks
about a sampling procedure, and then a 3-sigma allowance is applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..f2lin import F2Subspace, F2Vec, rand_bits, rref, sample_subspace, dual
from .. import statevec
from ..qrom import (
    OracleTable,
    PointMap,
    QueryRecord,
    QueryTrace,
    extract_by_random_query,
    oracle_new,
    prf_split_check,
    query_weight,
    reprogram,
)
from ..statevec import (
    DensityMatrix,
    RegisterLayout,
    SparseState,
    basis_state,
    density,
    trace_distance,
    ztwirl_mixture,
)
from .stats import BoundReport, derive_rng

__all__ = [
    "subspace_projector_suite",
    "ztwirl_suite",
    "gentle_measurement_suite",
    "post_measurement_suite",
    "bbbv_qwtotal_suite",
    "gen_owth_suite",
    "qwmeasure_check",
    "qrom_prf_suite",
    "owth_bound_suite",
    "LEMMA_SUITES",
    "run_lemma_suite",
]


# --- dense helpers -----------------------------------------------------------

_H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _walsh(n: int) -> np.ndarray:
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, _H1)
    return out


def _member_projector(space: F2Subspace) -> np.ndarray:
    d = np.zeros(1 << space.ambient_dim)
    for v in space.enumerate():
        d[v.val] = 1.0
    return np.diag(d)


def _phase_diag(n: int, s: int) -> np.ndarray:
    return np.diag(
        np.array([(-1.0) ** ((x & s).bit_count() & 1) for x in range(1 << n)])
    )


def _coset_vector(space: F2Subspace, s: F2Vec) -> np.ndarray:
    v = np.zeros(1 << space.ambient_dim, dtype=complex)
    for a in space.enumerate():
        v[a.val] = (-1.0) ** a.dot(s)
    return v / np.linalg.norm(v)


def _random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    r = rank or dim
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _pure_td(a: np.ndarray, b: np.ndarray) -> float:
    # sqrt(1 - |<a|b>|^2) via the residual norm, which stays accurate to
    # ~1e-14 for nearly identical states where the overlap form loses half
    # the mantissa
    c = np.vdot(a, b)
    return float(np.linalg.norm(b - c * a))


# --- subspace projector identity ----------------------------------------------


def _all_dim2_subspaces_gf2_4() -> list[F2Subspace]:
    seen = {}
    for a in range(1, 16):
        for b in range(1, 16):
            s = rref([F2Vec(4, a), F2Vec(4, b)], ambient_dim=4)
            if s.dim == 2:
                seen[s.basis] = s
    return [seen[k] for k in sorted(seen)]


def subspace_projector_suite(seed: int, phases_per_subspace: int = 10) -> list[BoundReport]:
    """Two-projector circuit equals the coset-state projector, entrywise.

    Checks Z_s H P_perp H P_A Z_s against |A_{0,s}><A_{0,s}| as dense
    16x16 matrices, for all 35 two-dimensional subspaces of GF(2)^4.
    """
    rng = derive_rng(seed, 0xA)
    w = _walsh(4)
    reports = []
    for idx, space in enumerate(_all_dim2_subspaces_gf2_4()):
        p_a = _member_projector(space)
        p_perp = _member_projector(dual(space))
        for j in range(phases_per_subspace):
            s = F2Vec.random(4, rng)
            zs = _phase_diag(4, s.val)
            circuit = zs @ w @ p_perp @ w @ p_a @ zs
            target = np.outer(_coset_vector(space, s), _coset_vector(space, s).conj())
            err = float(np.max(np.abs(circuit - target)))
            reports.append(
                BoundReport(f"subspace-proj[{idx},{j}]", err, 0.0, {"s": str(s)})
            )
    return reports


# --- z-twirl identity -------------------------------------------------------------


def ztwirl_suite(seed: int, instances: int = 100) -> list[BoundReport]:
    """Phase-averaged density equals the measured diagonal mixture."""
    rng = derive_rng(seed, 0xB)
    reports = []
    for i in range(instances):
        w = int(rng.integers(2, 5))
        rest = int(rng.integers(1, 7 - w))
        layout = RegisterLayout([("X", w), ("R", rest)])
        st = statevec.random_state(layout, rng)
        avg = ztwirl_mixture(lambda s: statevec.apply_phase(st, "X", s), w, ["X", "R"])
        vec = st.to_dense().reshape(1 << w, 1 << rest)
        dim = 1 << (w + rest)
        expect = np.zeros((dim, dim), dtype=complex)
        for x in range(1 << w):
            blk = np.zeros_like(vec)
            blk[x] = vec[x]
            flat = blk.reshape(-1)
            expect += np.outer(flat, flat.conj())
        td = trace_distance(avg, DensityMatrix(dim, expect))
        reports.append(BoundReport(f"ztwirl[{i}]", td, 0.0, {"x_bits": w}))
    return reports


# --- gentle measurement -------------------------------------------------------------


def gentle_measurement_suite(seed: int, instances: int = 200) -> list[BoundReport]:
    """TD(rho, sqrt(E) rho sqrt(E) / tr) <= sqrt(eps) for tr(E rho) = 1 - eps."""
    rng = derive_rng(seed, 0xC)
    reports = []
    for i in range(instances):
        dim = int(rng.integers(2, 17))
        rho = _random_density(dim, rng)
        # POVM element biased toward the identity so eps stays informative
        basis = _haar_unitary(dim, rng)
        eigs = 1.0 - rng.uniform(0.0, 0.4, size=dim)
        e = basis @ np.diag(eigs) @ basis.conj().T
        p = float(np.real(np.trace(e @ rho)))
        eps = max(0.0, 1.0 - p)
        sqrt_e = basis @ np.diag(np.sqrt(eigs)) @ basis.conj().T
        post = sqrt_e @ rho @ sqrt_e / p
        td = trace_distance(DensityMatrix(dim, rho), DensityMatrix(dim, post))
        reports.append(
            BoundReport(f"gentle[{i}]", td, math.sqrt(eps), {"dim": dim, "eps": eps})
        )
    return reports


def post_measurement_suite(seed: int, instances: int = 200) -> list[BoundReport]:
    """Conditioned states stay 3*eps/(2*p) close after a projective outcome."""
    rng = derive_rng(seed, 0xD)
    reports = []
    made = 0
    i = 0
    while made < instances:
        i += 1
        dim = int(rng.integers(4, 17))
        rho = _random_density(dim, rng)
        tau = _random_density(dim, rng)
        t = float(rng.uniform(0.02, 0.35))
        sig = (1 - t) * rho + t * tau
        eps = trace_distance(DensityMatrix(dim, rho), DensityMatrix(dim, sig))
        basis = _haar_unitary(dim, rng)
        cut = int(rng.integers(1, dim))
        blocks = [np.arange(cut), np.arange(cut, dim)]
        for b, idxs in enumerate(blocks):
            proj = basis[:, idxs] @ basis[:, idxs].conj().T
            p_i = float(np.real(np.trace(proj @ rho)))
            if p_i < 0.05:
                continue
            rho_c = proj @ rho @ proj / p_i
            q_i = float(np.real(np.trace(proj @ sig)))
            if q_i < 1e-15:
                td = 1.0
            else:
                sig_c = proj @ sig @ proj / q_i
                td = trace_distance(DensityMatrix(dim, rho_c), DensityMatrix(dim, sig_c))
            reports.append(
                BoundReport(
                    f"post-measurement[{i},{b}]",
                    td,
                    3 * eps / (2 * p_i),
                    {"dim": dim, "eps": eps, "p_i": p_i},
                )
            )
            made += 1
            if made >= instances:
                break
    return reports


# --- BBBV / query-weight distinguishing bounds (classical oracles) -----------------


@dataclass
class _OracleAlgoInstance:
    """A scripted oracle algorithm over registers (W, X, B), run densely."""

    w_bits: int
    in_bits: int
    out_bits: int
    T: int
    initial: np.ndarray  # shape (2^w, 2^in, 2^out)
    steps: list  # per query, a list of (op, arg) pre-operations

    def run(self, oracle, trace: Optional[QueryTrace] = None,
            target_set: Optional[set[int]] = None) -> np.ndarray:
        table = np.array([oracle.query(x) for x in range(1 << self.in_bits)])
        xs = np.arange(1 << self.in_bits)[:, None]
        bs = np.arange(1 << self.out_bits)[None, :]
        gather = bs ^ table[:, None]  # query: b -> b xor H(x)
        psi = self.initial.copy()
        for ops in self.steps:
            for op, arg in ops:
                psi = self._apply(psi, op, arg)
            if trace is not None:
                weights = np.sum(np.abs(psi) ** 2, axis=(0, 2))
                wdict = {int(x): float(p) for x, p in enumerate(weights) if p > 0}
                sw = None
                if target_set is not None:
                    sw = float(sum(p for x, p in wdict.items() if x in target_set))
                trace.records.append(QueryRecord(len(trace.records) + 1, wdict, sw))
            psi = psi[:, xs, gather].reshape(psi.shape)
        return psi

    def _apply(self, psi: np.ndarray, op: str, arg) -> np.ndarray:
        if op == "phase_x":
            sign = np.array([(-1.0) ** ((x & arg).bit_count() & 1) for x in range(psi.shape[1])])
            return psi * sign[None, :, None]
        if op == "phase_w":
            sign = np.array([(-1.0) ** ((w & arg).bit_count() & 1) for w in range(psi.shape[0])])
            return psi * sign[:, None, None]
        if op == "had_x":
            return np.einsum("xy,wyb->wxb", _walsh(self.in_bits), psi)
        if op == "had_w":
            return np.einsum("vw,wxb->vxb", _walsh(self.w_bits), psi)
        if op == "xor_wx":
            out = np.empty_like(psi)
            for w in range(psi.shape[0]):
                xs = np.arange(psi.shape[1]) ^ arg[w]
                out[w] = psi[w, xs, :]
            return out
        raise ValueError(f"unknown op {op}")


def _random_algo_instance(rng: np.random.Generator) -> tuple[_OracleAlgoInstance, OracleTable, object, set[int]]:
    w_bits = 2
    in_bits = int(rng.integers(3, 7))
    out_bits = int(rng.integers(2, 5))
    T = int(rng.integers(1, 9))
    dim = (1 << w_bits, 1 << in_bits, 1 << out_bits)
    flat = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    # sparse-ish start: keep a handful of basis terms
    mask = np.zeros(dim)
    for _ in range(int(rng.integers(2, 7))):
        mask[
            rng.integers(dim[0]), rng.integers(dim[1]), rng.integers(dim[2])
        ] = 1.0
    initial = flat * mask
    initial /= np.linalg.norm(initial)

    ops_menu = ["phase_x", "had_x", "xor_wx", "phase_w", "had_w"]
    steps = []
    for _ in range(T):
        ops = []
        for _ in range(int(rng.integers(0, 3))):
            op = ops_menu[int(rng.integers(len(ops_menu)))]
            if op == "phase_x":
                arg = int(rng.integers(1, 1 << in_bits))
            elif op == "phase_w":
                arg = int(rng.integers(1, 1 << w_bits))
            elif op == "xor_wx":
                arg = [int(rng.integers(1 << in_bits)) for _ in range(1 << w_bits)]
            else:
                arg = None
            ops.append((op, arg))
        steps.append(ops)

    inst = _OracleAlgoInstance(w_bits, in_bits, out_bits, T, initial, steps)
    h = oracle_new(int(rng.integers(1 << 62)), in_bits, out_bits)
    n_pts = int(rng.integers(1, 4))
    xs = rng.choice(1 << in_bits, size=n_pts, replace=False)
    entries = {}
    for x in xs:
        y = int(rng.integers(1 << out_bits))
        while y == h.query(int(x)):
            y = int(rng.integers(1 << out_bits))
        entries[int(x)] = y
    hp = reprogram(h, PointMap.of(entries))
    return inst, h, hp, set(entries)


def bbbv_qwtotal_suite(seed: int, instances: int = 100) -> list[BoundReport]:
    """Final-state distance against the query-weight bounds.

    For each instance the exact trace distance between the final states of
    the same algorithm run with H and with the reprogrammed H' is compared
    with the oracle-replacement bound and the distinguishing-advantage form
    2*sqrt(T)*sqrt(qw), with qw taken from the recorded trace.

    The replacement bound is checked as sqrt(2 * T * qw): the hybrid
    argument's per-query error vector has squared norm 2 * q_t because the
    original and reprogrammed XOR answers are orthogonal. The constant-one
    form sqrt(T * qw) is recorded per instance and flagged; it is violated
    by, e.g., a single query on (|x*> + |z>)/sqrt(2) with x* reprogrammed,
    where TD = sqrt(3)/2 > sqrt(1/2).
    """
    rng = derive_rng(seed, 0xE)
    reports = []
    for i in range(instances):
        inst, h, hp, diff_set = _random_algo_instance(rng)
        trace = QueryTrace()
        psi = inst.run(h, trace, diff_set).reshape(-1)
        psi_p = inst.run(hp).reshape(-1)
        lhs = _pure_td(psi, psi_p)
        qw = query_weight(trace, diff_set)
        rhs_bbbv = math.sqrt(2.0 * inst.T * qw)
        rhs_literal = math.sqrt(inst.T * qw)
        rhs_qwt = 2.0 * math.sqrt(inst.T) * math.sqrt(qw)
        extra = {
            "T": inst.T,
            "qw": qw,
            "points": len(diff_set),
            "rhs_constant_one_form": rhs_literal,
            "constant_one_form_holds": bool(lhs <= rhs_literal + 1e-9),
        }
        reports.append(BoundReport(f"qrom-replacement[{i}]", lhs, rhs_bbbv, extra))
        reports.append(BoundReport(f"qwtotal[{i}]", lhs, rhs_qwt, extra))
    return reports


# --- one-way to hiding for unitary oracles -------------------------------------------


def _random_unitary_oracle_pair(rng: np.random.Generator, q_bits: int):
    """Two oracle-accessible unitaries acting on the query register."""
    dim = 1 << q_bits
    kind = int(rng.integers(3))
    if kind == 0:  # two classical phase oracles
        g0 = rng.integers(0, 2, size=dim)
        g1 = g0.copy()
        flips = rng.choice(dim, size=int(rng.integers(1, max(2, dim // 2))), replace=False)
        g1[flips] ^= 1
        return np.diag((-1.0) ** g0), np.diag((-1.0) ** g1)
    if kind == 1:  # complex diagonal phases, perturbed
        th0 = rng.uniform(0, 2 * math.pi, size=dim)
        th1 = th0 + rng.normal(0, 0.7, size=dim)
        return np.diag(np.exp(1j * th0)), np.diag(np.exp(1j * th1))
    # xor-permutation oracles over (x, b) with b a single bit
    half = dim // 2
    g0 = rng.integers(0, 2, size=half)
    g1 = g0 ^ (rng.integers(0, 2, size=half))
    mats = []
    for g in (g0, g1):
        m = np.zeros((dim, dim))
        for x in range(half):
            for b in range(2):
                m[(x << 1) | (b ^ int(g[x])), (x << 1) | b] = 1.0
        mats.append(m)
    return mats[0], mats[1]


def gen_owth_suite(seed: int, instances: int = 100) -> list[BoundReport]:
    """Schmidt-resolved one-way-to-hiding bound for unitary oracles.

    lhs: exact final trace distance between runs with H and H'. rhs:
    sqrt(4T sum_t sum_i |alpha_ti|^2 TD(H|q_ti>, H'|q_ti>)^2), with the
    Schmidt data taken from the H run. Also checks the derived
    query-measurement corollary on a small grid of thresholds.
    """
    rng = derive_rng(seed, 0xF)
    reports = []
    for i in range(instances):
        w_bits = int(rng.integers(2, 4))
        q_bits = int(rng.integers(2, 4))
        T = int(rng.integers(1, 9))
        dw, dq = 1 << w_bits, 1 << q_bits
        h, hp = _random_unitary_oracle_pair(rng, q_bits)
        unitaries = [_haar_unitary(dw * dq, rng) for _ in range(T + 1)]

        psi0 = rng.normal(size=dw * dq) + 1j * rng.normal(size=dw * dq)
        psi0 /= np.linalg.norm(psi0)

        functional = 0.0
        schmidt_data = []
        psi, psi_p = psi0.copy(), psi0.copy()
        big_h = np.kron(np.eye(dw), h)
        big_hp = np.kron(np.eye(dw), hp)
        for t in range(T):
            psi = unitaries[t] @ psi
            psi_p = unitaries[t] @ psi_p
            # Schmidt decomposition of the H-run state across (W | Q)
            mat = psi.reshape(dw, dq)
            _, svals, vh = np.linalg.svd(mat, full_matrices=False)
            per_query = []
            for alpha, qvec in zip(svals, vh):
                # the Schmidt vector on Q has amplitudes Vh[i, :] directly:
                # psi = sum_i s_i (U[:, i]) (x) (Vh[i, :])
                if alpha < 1e-12:
                    continue
                td = _pure_td(h @ qvec, hp @ qvec)
                functional += alpha**2 * td**2
                per_query.append((float(alpha**2), float(td)))
            schmidt_data.append(per_query)
            psi = big_h @ psi
            psi_p = big_hp @ psi_p
        psi = unitaries[T] @ psi
        psi_p = unitaries[T] @ psi_p

        lhs = _pure_td(psi, psi_p)
        rhs = math.sqrt(4 * T * functional)
        reports.append(
            BoundReport(f"gen-owth[{i}]", lhs, rhs, {"T": T, "functional": functional})
        )

        # corollary: weight of strongly distinguishing query states
        eps = lhs
        for delta in (0.1, 0.3, 0.5):
            w_delta = sum(
                a2 for per_query in schmidt_data for a2, td in per_query if td >= delta
            )
            corr_lhs = (eps**2 / (4 * T**2) - delta**2) / (1 - delta**2)
            reports.append(
                BoundReport(
                    f"gen-owth-corollary[{i},delta={delta}]",
                    corr_lhs,
                    w_delta / T,
                    {"T": T, "eps": eps},
                )
            )
    return reports


# --- extraction success rate ------------------------------------------------------------


def qwmeasure_check(seed: int, runs: int = 10_000) -> list[BoundReport]:
    """Random-stopping extraction succeeds with rate >= qw/T^2 (minus 3 sigma)."""
    rng = derive_rng(seed, 0x10)
    h = oracle_new(1234, 4, 4)
    layout = RegisterLayout([("X", 4), ("B", 4)])
    reports = []

    r = 1 / math.sqrt(2)
    sup = SparseState(layout, {layout.pack({"X": 5}): r, layout.pack({"X": 9}): r})
    classical5 = basis_state(layout, {"X": 5})
    classical9 = basis_state(layout, {"X": 9})

    def algo_one_classical(st, handle):
        return handle.query(st, "X", "B")

    def algo_super_then_off(st, handle):
        handle.query(st, "X", "B")
        return handle.query(classical9, "X", "B")

    def algo_on_then_off(st, handle):
        handle.query(st, "X", "B")
        return handle.query(classical9, "X", "B")

    cases = [
        ("qwmeasure[T1-classical]", algo_one_classical, classical5, 1, 1.0),
        ("qwmeasure[T2-superposed]", algo_super_then_off, sup, 2, 0.5),
        ("qwmeasure[T2-classical]", algo_on_then_off, classical5, 2, 1.0),
    ]
    S = {5}
    for name, algo, st0, T, qw in cases:
        hits = 0
        for _ in range(runs):
            out = extract_by_random_query(algo, st0, h, T, rng)
            if out is not None and out[0] in S and out[1] == h.query(out[0]):
                hits += 1
        rate = hits / runs
        sigma = math.sqrt(max(rate * (1 - rate), 1e-9) / runs)
        reports.append(
            BoundReport(
                name,
                qw / T**2 - 3 * sigma,
                rate,
                {"qw": qw, "T": T, "runs": runs},
            )
        )
    return reports


# --- QROM PRF splitting -----------------------------------------------------------------


def qrom_prf_suite(seed: int, probes: int = 10_000) -> list[BoundReport]:
    """H(k || .) is statistically indistinguishable from a fresh table."""
    rng = derive_rng(seed, 0x11)
    reports = []
    for i, (key_bits, suffix_bits, out_bits, cap) in enumerate(
        [(8, 16, 16, 4096), (12, 12, 16, 2048), (16, 8, 12, 128)]
    ):
        h = oracle_new(int(rng.integers(1 << 62)), key_bits + suffix_bits, out_bits)
        k = F2Vec(key_bits, rand_bits(rng, key_bits))
        n = min(probes, cap)
        rep = prf_split_check(h, k, n, rng)
        worst = max(
            (abs(b - 0.5) for b in rep.bit_balance_split + rep.bit_balance_fresh),
            default=0.0,
        )
        sigma = (0.25 / n) ** 0.5
        reports.append(
            BoundReport(
                f"qrom-prf[{i}]",
                worst,
                3 * sigma,
                {"probes": n, "collisions": [rep.collisions_split, rep.collisions_fresh],
                 "ok": rep.ok},
            )
        )
    return reports


# --- aggregate ---------------------------------------------------------------------------


def owth_bound_suite(seed: int, instances: int = 100) -> list[BoundReport]:
    """All one-way-to-hiding style checks: replacement, distinguishing,
    unitary-oracle, and extraction."""
    out = []
    out += bbbv_qwtotal_suite(seed, instances)
    out += gen_owth_suite(seed, instances)
    out += qwmeasure_check(seed)
    return out


LEMMA_SUITES: dict[str, Callable[[int], list[BoundReport]]] = {
    "subspace-proj": subspace_projector_suite,
    "ztwirl": ztwirl_suite,
    "gentle": gentle_measurement_suite,
    "post-measurement": post_measurement_suite,
    "qrom-replacement": lambda seed: bbbv_qwtotal_suite(seed),
    "gen-owth": lambda seed: gen_owth_suite(seed),
    "qwmeasure": lambda seed: qwmeasure_check(seed),
    "qrom-prf": lambda seed: qrom_prf_suite(seed),
}


def run_lemma_suite(lemma_id: str, seed: int) -> list[BoundReport]:
    if lemma_id not in LEMMA_SUITES:
        raise KeyError(f"unknown lemma suite {lemma_id!r}")
    return LEMMA_SUITES[lemma_id](seed)
