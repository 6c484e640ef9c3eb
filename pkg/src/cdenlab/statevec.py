"""Sparse pure-state simulation over named bit registers.

States map packed basis labels to complex amplitudes. A label packs the
registers in layout order with the first register in the most significant
bits, so the concatenated bit string read left to right is the label text
and lexicographic order equals numeric order.

All operations return new states; inputs are never mutated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .f2lin import F2Subspace, F2Vec, rand_bits

__all__ = [
    "RegisterLayout",
    "SparseState",
    "DensityMatrix",
    "MeasureResult",
    "basis_state",
    "coset_state",
    "apply_classical_isometry",
    "apply_phase",
    "hadamard",
    "measure",
    "measure_hadamard_pair",
    "project_pure",
    "subspace_pvm",
    "density",
    "trace_distance",
    "ztwirl_mixture",
    "random_state",
]

PRUNE_EPS = 1e-12
NORM_TOL = 1e-9
# output support of a Hadamard is capped at input-terms * 2^width
HADAMARD_BUDGET = 1 << 22
DENSITY_MAX_BITS = 12


class RegisterLayout:
    """Ordered named bit registers; total width up to 128."""

    def __init__(self, regs: Sequence[tuple[str, int]]):
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate register names")
        for n, w in regs:
            if w < 1:
                raise ValueError(f"register {n!r} must be at least 1 bit wide")
        self.regs = tuple((str(n), int(w)) for n, w in regs)
        self.total_width = sum(w for _, w in self.regs)
        if self.total_width > 128:
            raise ValueError("total width exceeds 128 bits")
        self._shift: dict[str, int] = {}
        self._width: dict[str, int] = {}
        pos = self.total_width
        for n, w in self.regs:
            pos -= w
            self._shift[n] = pos
            self._width[n] = w

    def width(self, name: str) -> int:
        return self._width[name]

    def names(self) -> list[str]:
        return [n for n, _ in self.regs]

    def extract(self, label: int, name: str) -> int:
        return (label >> self._shift[name]) & ((1 << self._width[name]) - 1)

    def vec(self, label: int, name: str) -> F2Vec:
        return F2Vec(self._width[name], self.extract(label, name))

    def replace(self, label: int, name: str, value: int) -> int:
        w, s = self._width[name], self._shift[name]
        if not 0 <= value < (1 << w):
            raise ValueError(f"value {value} out of range for register {name!r}")
        return (label & ~(((1 << w) - 1) << s)) | (value << s)

    def pack(self, values: dict[str, int]) -> int:
        label = 0
        for n in values:
            if n not in self._width:
                raise KeyError(f"unknown register {n!r}")
        for n, _ in self.regs:
            label = self.replace(label, n, values.get(n, 0))
        return label

    def label_str(self, label: int) -> str:
        parts = []
        for n, w in self.regs:
            parts.append(format(self.extract(label, n), f"0{w}b"))
        return "|".join(parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterLayout) and self.regs == other.regs

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{w}" for n, w in self.regs)
        return f"RegisterLayout({inner})"


@dataclass(frozen=True)
class SparseState:
    """Pure state as a mapping from packed basis labels to amplitudes."""

    layout: RegisterLayout
    amps: dict[int, complex]
    subnormalized: bool = False

    def __post_init__(self):
        if not self.subnormalized:
            n = self.norm_sq()
            if abs(n - 1.0) > NORM_TOL:
                raise ValueError(f"state norm^2 = {n}, not 1 (tag subnormalized?)")

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amps.values())

    def support(self) -> list[int]:
        return sorted(self.amps)

    def dump(self) -> str:
        """One line per basis term: `label(re,im)`, labels grouped by register."""
        lines = []
        for label in sorted(self.amps):
            a = self.amps[label]
            lines.append(f"{self.layout.label_str(label)}({a.real:.12g},{a.imag:.12g})")
        return "\n".join(lines)

    def to_dense(self) -> np.ndarray:
        if self.layout.total_width > 22:
            raise ValueError("state too wide to densify")
        out = np.zeros(1 << self.layout.total_width, dtype=complex)
        for label, a in self.amps.items():
            out[label] = a
        return out


class MeasureResult(NamedTuple):
    outcome: F2Vec
    post: SparseState
    prob: float
    renormalized: bool


def _pruned(amps: dict[int, complex]) -> dict[int, complex]:
    return {k: v for k, v in amps.items() if abs(v) >= PRUNE_EPS}


def basis_state(layout: RegisterLayout, values: dict[str, int] | None = None) -> SparseState:
    return SparseState(layout, {layout.pack(values or {}): 1.0 + 0j})


def coset_state(
    space: F2Subspace,
    s: F2Vec,
    exclude_zero: bool = False,
    layout: RegisterLayout | None = None,
    reg: str = "A",
) -> SparseState:
    """The phased coset state over `reg`: sum over a in A of (-1)^(a.s)|a>.

    With `exclude_zero` the a = 0 term is dropped (the simulator's variant).
    Registers other than `reg` are left zeroed.
    """
    n = space.ambient_dim
    if space.dim > 16:
        raise ValueError("subspace dimension too large to materialize")
    if s.n != n:
        raise ValueError("phase vector length differs from ambient dimension")
    if exclude_zero and space.dim < 1:
        raise ValueError("cannot exclude zero from the zero subspace")
    if layout is None:
        layout = RegisterLayout([(reg, n)])
    elements = space.enumerate()
    if exclude_zero:
        elements = [a for a in elements if not a.is_zero()]
    norm = 1.0 / math.sqrt(len(elements))
    amps: dict[int, complex] = {}
    for a in elements:
        sign = -1.0 if a.dot(s) else 1.0
        amps[layout.pack({reg: a.val})] = sign * norm
    return SparseState(layout, amps)


def apply_classical_isometry(
    st: SparseState,
    in_regs: Sequence[str],
    out_reg: str,
    f: Callable[..., int],
) -> SparseState:
    """XOR-apply a classical function: |x>|y> -> |x>|y xor f(x)>.

    `f` receives one integer per input register and must return a value
    fitting the output register. Bijective on labels, so the norm is
    preserved exactly.
    """
    layout = st.layout
    out_w = layout.width(out_reg)
    amps: dict[int, complex] = {}
    for label, amp in st.amps.items():
        args = [layout.extract(label, r) for r in in_regs]
        y = f(*args)
        if not 0 <= y < (1 << out_w):
            raise ValueError(f"f output {y} does not fit register {out_reg!r}")
        new_label = layout.replace(label, out_reg, layout.extract(label, out_reg) ^ y)
        amps[new_label] = amp
    return SparseState(layout, amps, subnormalized=st.subnormalized)


def apply_phase(st: SparseState, reg: str, s: F2Vec) -> SparseState:
    """Multiply each term by (-1)^(s . x_reg)."""
    layout = st.layout
    if s.n != layout.width(reg):
        raise ValueError("phase vector length differs from register width")
    amps = {}
    for label, amp in st.amps.items():
        x = layout.extract(label, reg)
        amps[label] = -amp if (x & s.val).bit_count() & 1 else amp
    return SparseState(layout, amps, subnormalized=st.subnormalized)


def hadamard(st: SparseState, reg: str) -> SparseState:
    """Walsh-Hadamard on one register, coherently with all others."""
    layout = st.layout
    w = layout.width(reg)
    if len(st.amps) << w > HADAMARD_BUDGET:
        raise ValueError(f"Hadamard width cap exceeded on register {reg!r}")
    scale = 2.0 ** (-w / 2.0)
    amps: dict[int, complex] = {}
    for label, amp in st.amps.items():
        x = layout.extract(label, reg)
        base = layout.replace(label, reg, 0)
        contrib = amp * scale
        shift = layout._shift[reg]
        for d in range(1 << w):
            term = -contrib if (d & x).bit_count() & 1 else contrib
            key = base | (d << shift)
            prev = amps.get(key)
            amps[key] = term if prev is None else prev + term
    return SparseState(layout, _pruned(amps), subnormalized=st.subnormalized)


def measure(st: SparseState, reg: str, rng: np.random.Generator) -> MeasureResult:
    """Born-rule measurement of one register.

    The outcome is drawn by inverse CDF over lexicographically ordered
    register values using a single uniform draw, so results are
    bit-reproducible given a seed. Subnormalized input is renormalized
    first and flagged in the result.
    """
    layout = st.layout
    probs: dict[int, float] = {}
    for label, amp in st.amps.items():
        v = layout.extract(label, reg)
        probs[v] = probs.get(v, 0.0) + abs(amp) ** 2
    total = sum(probs.values())
    renormalized = abs(total - 1.0) > NORM_TOL
    u = float(rng.random()) * total
    acc = 0.0
    outcome = None
    for v in sorted(probs):
        acc += probs[v]
        if u <= acc:
            outcome = v
            break
    if outcome is None:  # guard against float round-off at the top end
        outcome = max(probs)
    p = probs[outcome] / total
    scale = 1.0 / math.sqrt(probs[outcome])
    post_amps = {
        label: amp * scale
        for label, amp in st.amps.items()
        if layout.extract(label, reg) == outcome
    }
    post = SparseState(layout, _pruned(post_amps))
    return MeasureResult(F2Vec(layout.width(reg), outcome), post, p, renormalized)


def measure_hadamard_pair(st: SparseState, rng: np.random.Generator) -> F2Vec:
    """Measure all registers in the Hadamard basis, for 1- or 2-term states.

    For (|u> + (-1)^c |v>)/sqrt(2) the outcome is exactly uniform over
    {d : d.(u xor v) = c}, sampled directly without materializing the
    2^(W-1)-term transform. A single classical label yields a uniform d.
    """
    W = st.layout.total_width
    labels = st.support()
    if len(labels) == 1:
        return F2Vec(W, rand_bits(rng, W))
    if len(labels) != 2:
        raise ValueError("shortcut requires a 1- or 2-term state")
    u, v = labels
    ratio = st.amps[v] / st.amps[u]
    if abs(ratio - 1.0) < 1e-9:
        c = 0
    elif abs(ratio + 1.0) < 1e-9:
        c = 1
    else:
        raise ValueError("two-term state does not have a +-1 relative phase")
    diff = u ^ v
    pivot = diff.bit_length() - 1
    free_mask = ((1 << W) - 1) ^ (1 << pivot)
    d = rand_bits(rng, W) & free_mask
    if ((d & diff).bit_count() & 1) != c:
        d |= 1 << pivot
    return F2Vec(W, d)


def _phi_layout_matches(st: SparseState, regs: Sequence[str], phi: SparseState) -> None:
    widths = [st.layout.width(r) for r in regs]
    phi_widths = [w for _, w in phi.layout.regs]
    if widths != phi_widths:
        raise ValueError("projector state layout does not match the named registers")


def project_pure(
    st: SparseState, regs: Sequence[str], phi: SparseState
) -> tuple[float, SparseState | None]:
    """Project the named registers onto the pure state `phi`.

    Returns the acceptance probability and the renormalized post-acceptance
    state (None when the probability vanishes).
    """
    _phi_layout_matches(st, regs, phi)
    layout = st.layout
    phi_names = phi.layout.names()
    # residual amplitude per assignment of the non-projected registers
    coef: dict[int, complex] = {}
    for label, amp in st.amps.items():
        key = phi.layout.pack(
            {pn: layout.extract(label, rn) for pn, rn in zip(phi_names, regs)}
        )
        pamp = phi.amps.get(key)
        if pamp is None:
            continue
        rest = label
        for rn in regs:
            rest = layout.replace(rest, rn, 0)
        coef[rest] = coef.get(rest, 0.0) + pamp.conjugate() * amp
    prob = sum(abs(c) ** 2 for c in coef.values())
    if prob < PRUNE_EPS**2:
        return 0.0, None
    scale = 1.0 / math.sqrt(prob)
    amps: dict[int, complex] = {}
    for rest, c in coef.items():
        for key, pamp in phi.amps.items():
            label = rest
            for pn, rn in zip(phi_names, regs):
                label = layout.replace(label, rn, phi.layout.extract(key, pn))
            amps[label] = amps.get(label, 0.0) + c * pamp * scale
    return prob, SparseState(layout, _pruned(amps))


def subspace_pvm(
    st: SparseState, reg: str, space: F2Subspace, s: F2Vec
) -> tuple[float, SparseState | None]:
    """PVM onto the phased coset state |A_{0,s}> via the two-projector circuit.

    Applies Z_s H P_Aperp H P_A Z_s on `reg`; the squared norm of the result
    is the acceptance probability and matches `project_pure` against
    `coset_state(A, s)` to 1e-9.
    """
    from .f2lin import dual as f2dual

    layout = st.layout
    n = layout.width(reg)
    if n != space.ambient_dim:
        raise ValueError("register width differs from ambient dimension")
    if n > 12:
        raise ValueError("subspace PVM width cap exceeded")
    perp = f2dual(space)

    work = apply_phase(st, reg, s)
    work = SparseState(
        layout,
        {l: a for l, a in work.amps.items() if space.contains(layout.vec(l, reg))},
        subnormalized=True,
    )
    if not work.amps:
        return 0.0, None
    work = hadamard(work, reg)
    work = SparseState(
        layout,
        {l: a for l, a in work.amps.items() if perp.contains(layout.vec(l, reg))},
        subnormalized=True,
    )
    if not work.amps:
        return 0.0, None
    work = hadamard(work, reg)
    work = apply_phase(work, reg, s)
    prob = work.norm_sq()
    if prob < PRUNE_EPS**2:
        return 0.0, None
    scale = 1.0 / math.sqrt(prob)
    post = SparseState(layout, _pruned({l: a * scale for l, a in work.amps.items()}))
    return prob, post


@dataclass
class DensityMatrix:
    """Dense Hermitian density matrix."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        if self.mat.shape != (self.dim, self.dim):
            raise ValueError("matrix shape differs from declared dimension")
        if np.max(np.abs(self.mat - self.mat.conj().T)) > 1e-8:
            raise ValueError("matrix is not Hermitian")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))


def density(st: SparseState, keep_regs: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix over the kept registers (in layout order)."""
    layout = st.layout
    keep = [n for n, _ in layout.regs if n in set(keep_regs)]
    if len(keep) != len(set(keep_regs)):
        raise KeyError("unknown register in keep_regs")
    kept_bits = sum(layout.width(n) for n in keep)
    if kept_bits > DENSITY_MAX_BITS:
        raise ValueError("density matrix dimension cap exceeded")
    dim = 1 << kept_bits

    def kept_index(label: int) -> int:
        idx = 0
        for n in keep:
            idx = (idx << layout.width(n)) | layout.extract(label, n)
        return idx

    # group amplitudes by the traced-out assignment
    groups: dict[int, dict[int, complex]] = {}
    for label, amp in st.amps.items():
        rest = label
        for n in keep:
            rest = layout.replace(rest, n, 0)
        groups.setdefault(rest, {})[kept_index(label)] = amp
    mat = np.zeros((dim, dim), dtype=complex)
    for vec in groups.values():
        idxs = np.fromiter(vec.keys(), dtype=np.int64)
        vals = np.fromiter(vec.values(), dtype=complex)
        mat[np.ix_(idxs, idxs)] += np.outer(vals, vals.conj())
    return DensityMatrix(dim, mat)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) trace norm of rho - sigma via an exact eigendecomposition."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    eigs = np.linalg.eigvalsh(rho.mat - sigma.mat)
    return float(0.5 * np.sum(np.abs(eigs)))


def ztwirl_mixture(
    builder: Callable[[F2Vec], SparseState],
    domain_bits: int,
    keep_regs: Sequence[str],
) -> DensityMatrix:
    """Average the density of builder(s) over all phase vectors s."""
    if domain_bits > 8:
        raise ValueError("twirl domain cap exceeded")
    total: np.ndarray | None = None
    dim = 0
    for v in range(1 << domain_bits):
        rho = density(builder(F2Vec(domain_bits, v)), keep_regs)
        if total is None:
            total = rho.mat.copy()
            dim = rho.dim
        else:
            total += rho.mat
    assert total is not None
    return DensityMatrix(dim, total / float(1 << domain_bits))


def random_state(
    layout: RegisterLayout,
    rng: np.random.Generator,
    support: int | None = None,
) -> SparseState:
    """Haar-ish random sparse state: Gaussian amplitudes on a random support."""
    dim = 1 << layout.total_width
    if support is None or support >= dim:
        labels = np.arange(dim)
    else:
        labels = rng.choice(dim, size=support, replace=False)
    re = rng.normal(size=len(labels))
    im = rng.normal(size=len(labels))
    vec = re + 1j * im
    vec /= np.linalg.norm(vec)
    return SparseState(layout, _pruned({int(l): complex(a) for l, a in zip(labels, vec)}))
