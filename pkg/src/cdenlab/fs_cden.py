"""Coset-state Fiat-Shamir with certified deniability.

An argument for a Schnorr statement x is a superposition over a hidden
subspace A, each branch carrying a full Fiat-Shamir transcript whose
challenge is keyed on the branch label:

    |pi>  ~  sum over a in A of (-1)^(s.a) |a>|s1_a, s2_a, s3_a>

The deletion certificate is the argument itself; deletion verification
uncomputes the transcripts with the deletion key and projects the subspace
register onto the phased coset state. The deniability simulator builds the
same shape from HVZK-simulated transcripts and locally reprogrammed oracle
answers, never touching the witness.

Oracle input convention: one table serves both the per-branch transcript
randomness H(k || a) and the branch challenge H(a || x || s1). The first
lambda bits carry k or a; the remaining segment carries a or x || s1,
left-aligned and zero-padded. Outputs are reduced mod q for challenges and
randomness (bias < 2^-12 at the default widths).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .f2lin import F2Subspace, F2Vec, rand_bits, sample_subspace
from . import sigma, statevec
from .qrom import OracleView, PointMap, oracle_spec
from .sigma import GroupParams, DEFAULT_PARAMS
from .statevec import RegisterLayout, SparseState

__all__ = [
    "FSParams",
    "ProofState",
    "FSDeletionKey",
    "SimKeys",
    "ExperimentRecord",
    "DelverResult",
    "AdversaryOutput",
    "prove",
    "verify",
    "del_cert",
    "delver",
    "sim_oracle",
    "sim_point_entries",
    "simulate_experiment",
    "nizk_real_experiment",
]

ORACLE_OUT_BITS = 16


@dataclass(frozen=True)
class FSParams:
    """Widths and group for one instantiation of the construction."""

    lam: int
    group: GroupParams = DEFAULT_PARAMS

    def __post_init__(self):
        if self.lam % 2 != 0 or not 2 <= self.lam <= 12:
            raise ValueError("lambda must be even and between 2 and 12")

    @property
    def gbits(self) -> int:
        return self.group.elem_bits

    @property
    def qbits(self) -> int:
        return self.group.scalar_bits

    @property
    def second_bits(self) -> int:
        """Width of the oracle input segment after the key/branch prefix."""
        return max(self.lam, 2 * self.gbits)

    @property
    def oracle_in_bits(self) -> int:
        return self.lam + self.second_bits

    @property
    def oracle_out_bits(self) -> int:
        return ORACLE_OUT_BITS

    def layout(self) -> RegisterLayout:
        return RegisterLayout(
            [("A", self.lam), ("S1", self.gbits), ("S2", self.qbits), ("S3", self.qbits)]
        )

    def randomness_input(self, key: int, a: int) -> int:
        """Oracle input for per-branch randomness: key || a, zero-padded."""
        return (key << self.second_bits) | (a << (self.second_bits - self.lam))

    def challenge_input(self, a: int, x: int, s1: int) -> int:
        """Oracle input for the branch challenge: a || x || s1, zero-padded."""
        second = ((x << self.gbits) | s1) << (self.second_bits - 2 * self.gbits)
        return (a << self.second_bits) | second

    def check_oracle(self, oracle) -> None:
        if oracle.in_bits != self.oracle_in_bits:
            raise ValueError(
                f"oracle input width {oracle.in_bits} != expected {self.oracle_in_bits}"
            )
        if oracle.out_bits < 12:
            raise ValueError("oracle output too narrow for low-bias challenges")


@dataclass(frozen=True)
class FSDeletionKey:
    space: F2Subspace
    s: F2Vec
    k: int
    w: int


@dataclass(frozen=True)
class SimKeys:
    space: F2Subspace
    s: F2Vec
    k: int
    k_ch: int

    def __post_init__(self):
        if self.k == self.k_ch:
            raise ValueError("simulator keys must differ")


@dataclass(frozen=True)
class ProofState:
    state: SparseState
    x: int


@dataclass(frozen=True)
class DelverResult:
    accepted: bool
    accept_prob: float
    pvm_prob: float
    post: Optional[SparseState]


@dataclass(frozen=True)
class AdversaryOutput:
    cert: SparseState
    memo: dict


@dataclass(frozen=True)
class ExperimentRecord:
    accepted: bool
    accept_prob: float
    pvm_prob: float
    residual: Optional[dict]  # None encodes the bottom output
    lam: int
    seed: Optional[int]
    oracle_spec: dict

    def to_json(self) -> dict:
        residual_hex = None
        if self.residual is not None:
            residual_hex = json.dumps(self.residual, sort_keys=True).encode().hex()
        return {
            "accepted": self.accepted,
            "accept_prob": self.accept_prob,
            "residual": residual_hex,
            "lambda": self.lam,
            "seed": self.seed,
            "oracle_spec": self.oracle_spec,
        }


def _honest_transcript_fn(
    fsp: FSParams, x: int, w: int, k: int, oracle
) -> Callable[[int], tuple[int, int, int]]:
    """Per-branch honest transcripts, memoized over branch labels."""
    g = fsp.group
    cache: dict[int, tuple[int, int, int]] = {}

    def transcript(a: int) -> tuple[int, int, int]:
        hit = cache.get(a)
        if hit is None:
            r = oracle.query(fsp.randomness_input(k, a)) % g.q
            s1 = sigma.p1(g, x, w, r)
            s2 = oracle.query(fsp.challenge_input(a, x, s1)) % g.q
            s3 = sigma.p3(g, x, w, r, s2)
            hit = cache[a] = (s1, s2, s3)
        return hit

    return transcript


def _sim_transcript_fn(
    fsp: FSParams, x: int, keys: SimKeys, oracle
) -> Callable[[int], tuple[int, int, int]]:
    """HVZK-simulated transcripts with challenges keyed by k_ch."""
    g = fsp.group
    cache: dict[int, tuple[int, int, int]] = {}

    def transcript(a: int) -> tuple[int, int, int]:
        hit = cache.get(a)
        if hit is None:
            s2 = oracle.query(fsp.randomness_input(keys.k_ch, a)) % g.q
            s3_rand = oracle.query(fsp.randomness_input(keys.k, a))
            s1, s3 = sigma.simulate(g, x, s2, s3_rand)
            hit = cache[a] = (s1, s2, s3)
        return hit

    return transcript


def _attach_transcripts(
    st: SparseState, transcript: Callable[[int], tuple[int, int, int]]
) -> SparseState:
    """XOR the per-branch transcript into the three Sigma registers."""
    for reg, idx in (("S1", 0), ("S2", 1), ("S3", 2)):
        st = statevec.apply_classical_isometry(
            st, ["A"], reg, lambda a, i=idx: transcript(a)[i]
        )
    return st


def prove(
    x: int,
    w: int,
    oracle,
    lam: int,
    rng: np.random.Generator,
    group: GroupParams = DEFAULT_PARAMS,
) -> tuple[ProofState, FSDeletionKey]:
    """Build the coset-state argument and its deletion key."""
    fsp = FSParams(lam, group)
    fsp.check_oracle(oracle)
    if pow(group.g, w, group.p) != x:
        raise ValueError("witness does not match the statement")
    space = sample_subspace(lam, lam // 2, rng)
    s = F2Vec.random(lam, rng)
    k = rand_bits(rng, lam)
    st = statevec.coset_state(space, s, layout=fsp.layout(), reg="A")
    st = _attach_transcripts(st, _honest_transcript_fn(fsp, x, w, k, oracle))
    return ProofState(st, x), FSDeletionKey(space, s, k, w)


def verify(
    x: int,
    pf: ProofState,
    oracle,
    group: GroupParams = DEFAULT_PARAMS,
) -> tuple[float, Optional[ProofState]]:
    """Coherently evaluate the Fiat-Shamir verification predicate.

    The predicate per branch is s2 = H(a || x || s1) mod q together with
    the Schnorr equation. Returns the Born probability of acceptance and
    the accept-conditioned state with the predicate uncomputed; on honest
    proofs this equals the input exactly.
    """
    st = pf.state
    lam = st.layout.width("A")
    fsp = FSParams(lam, group)
    fsp.check_oracle(oracle)

    def predicate(a: int, s1: int, s2: int, s3: int) -> int:
        expected = oracle.query(fsp.challenge_input(a, x, s1)) % group.q
        ok = s2 == expected and sigma.verify(group, x, sigma.Transcript(s1, s2, s3))
        return 1 if ok else 0

    extended = RegisterLayout(list(st.layout.regs) + [("V", 1)])
    lifted = SparseState(extended, {label << 1: amp for label, amp in st.amps.items()})
    regs = ["A", "S1", "S2", "S3"]
    computed = statevec.apply_classical_isometry(lifted, regs, "V", predicate)
    accept_prob = sum(
        abs(amp) ** 2 for label, amp in computed.amps.items() if label & 1
    )
    if accept_prob < 1e-24:
        return 0.0, None
    scale = 1.0 / accept_prob**0.5
    kept = {
        label: amp * scale for label, amp in computed.amps.items() if label & 1
    }
    # uncompute the predicate bit; on the accept branch it is identically 1
    post = SparseState(st.layout, {label >> 1: amp for label, amp in kept.items()})
    return accept_prob, ProofState(post, x)


def del_cert(pf: ProofState) -> ProofState:
    """Deletion outputs the argument register unchanged."""
    return pf


def _delver_core(
    fsp: FSParams,
    cert: SparseState,
    space: F2Subspace,
    s: F2Vec,
    transcript: Callable[[int], tuple[int, int, int]],
    rng: np.random.Generator,
) -> DelverResult:
    """Uncompute transcripts, PVM onto the coset state, check zeroed Sigma regs."""
    st = _attach_transcripts(cert, transcript)
    pvm_prob, post = statevec.subspace_pvm(st, "A", space, s)
    sigma_zeroed = post is not None and all(
        st.layout.extract(label, reg) == 0
        for label in post.amps
        for reg in ("S1", "S2", "S3")
    )
    accept_prob = pvm_prob if sigma_zeroed else 0.0
    accepted = bool(float(rng.random()) < accept_prob)
    return DelverResult(accepted, accept_prob, pvm_prob, post if sigma_zeroed else None)


def delver(
    dk: FSDeletionKey,
    cert: ProofState,
    x: int,
    oracle,
    rng: np.random.Generator,
    group: GroupParams = DEFAULT_PARAMS,
) -> DelverResult:
    """Deletion verification with the honest transcript uncompute."""
    lam = cert.state.layout.width("A")
    fsp = FSParams(lam, group)
    fsp.check_oracle(oracle)
    transcript = _honest_transcript_fn(fsp, x, dk.w, dk.k, oracle)
    return _delver_core(fsp, cert.state, dk.space, dk.s, transcript, rng)


def sim_point_entries(fsp: FSParams, x: int, keys: SimKeys, oracle) -> dict[int, int]:
    """The simulator's reprogrammed points.

    For every branch a in A minus zero, the challenge input a || x || s1_a
    (with the simulated first message) is redirected to the branch value
    H(k_ch || a), so simulated transcripts verify under the view.
    """
    transcript = _sim_transcript_fn(fsp, x, keys, oracle)
    entries: dict[int, int] = {}
    for a in keys.space.enumerate():
        if a.is_zero():
            continue
        s1, _, _ = transcript(a.val)
        entries[fsp.challenge_input(a.val, x, s1)] = oracle.query(
            fsp.randomness_input(keys.k_ch, a.val)
        )
    return entries


def sim_oracle(oracle, keys: SimKeys, x: int, group: GroupParams = DEFAULT_PARAMS) -> OracleView:
    """The locally reprogrammed oracle handed to the adversary."""
    fsp = FSParams(keys.space.ambient_dim, group)
    fsp.check_oracle(oracle)
    return OracleView(oracle, PointMap.of(sim_point_entries(fsp, x, keys, oracle)))


def _sample_sim_keys(lam: int, rng: np.random.Generator) -> SimKeys:
    space = sample_subspace(lam, lam // 2, rng)
    s = F2Vec.random(lam, rng)
    k = rand_bits(rng, lam)
    k_ch = rand_bits(rng, lam)
    while k_ch == k:
        k_ch = rand_bits(rng, lam)
    return SimKeys(space, s, k, k_ch)


def simulate_experiment(
    x: int,
    oracle,
    adversary: Callable[[SparseState, object, np.random.Generator], AdversaryOutput],
    lam: int,
    rng: np.random.Generator,
    group: GroupParams = DEFAULT_PARAMS,
    seed: Optional[int] = None,
) -> ExperimentRecord:
    """The deniability simulator run against an adversary strategy.

    Builds the zero-excluded coset state with simulated transcripts, hands
    the adversary the reprogrammed oracle view, then verifies deletion by
    uncomputing the simulated transcripts and projecting onto the full
    phased coset state. Outputs the adversary's residual memo on accept.
    """
    fsp = FSParams(lam, group)
    fsp.check_oracle(oracle)
    keys = _sample_sim_keys(lam, rng)
    transcript = _sim_transcript_fn(fsp, x, keys, oracle)
    st = statevec.coset_state(keys.space, keys.s, exclude_zero=True, layout=fsp.layout(), reg="A")
    st = _attach_transcripts(st, transcript)
    view = sim_oracle(oracle, keys, x, group)
    result = adversary(st, view, rng)
    outcome = _delver_core(fsp, result.cert, keys.space, keys.s, transcript, rng)
    return ExperimentRecord(
        accepted=outcome.accepted,
        accept_prob=outcome.accept_prob,
        pvm_prob=outcome.pvm_prob,
        residual=result.memo if outcome.accepted else None,
        lam=lam,
        seed=seed,
        oracle_spec=oracle_spec(view),
    )


def nizk_real_experiment(
    x: int,
    w: int,
    oracle,
    adversary: Callable[[SparseState, object, np.random.Generator], AdversaryOutput],
    lam: int,
    rng: np.random.Generator,
    group: GroupParams = DEFAULT_PARAMS,
    seed: Optional[int] = None,
) -> ExperimentRecord:
    """The real deniability experiment: prove, run the adversary, verify deletion."""
    pf, dk = prove(x, w, oracle, lam, rng, group)
    result = adversary(pf.state, oracle, rng)
    outcome = delver(dk, ProofState(result.cert, x), x, oracle, rng, group)
    return ExperimentRecord(
        accepted=outcome.accepted,
        accept_prob=outcome.accept_prob,
        pvm_prob=outcome.pvm_prob,
        residual=result.memo if outcome.accepted else None,
        lam=lam,
        seed=seed,
        oracle_spec=oracle_spec(oracle),
    )
