"""Scripted adversary strategies for the security games.

Strategies are classical control programs over the statevec/qrom toolkit:
they may hold quantum registers, apply toolkit operations, and query oracle
handles. Each game's harness documents the view its strategies receive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..f2lin import F2Vec, rand_bits
from ..fs_cden import AdversaryOutput
from .. import statevec
from ..statevec import SparseState, basis_state

__all__ = [
    "Strategy",
    "honest_deleter",
    "measure_subspace_register",
    "measure_full_transcript",
    "parity_memo_adversary",
    "zeros_adversary",
]


@dataclass(frozen=True)
class Strategy:
    """A named strategy callback plus harness-relevant metadata."""

    name: str
    fn: Callable
    needs_secrets: bool = False
    # for the adaptive-deletion game: whether f_i is fixed before or chosen
    # after seeing the states
    f_mode: str = "post-state"
    meta: dict = field(default_factory=dict)


# --- deniability-experiment adversaries (view: state, oracle handle, rng) ---


def honest_deleter(state: SparseState, oracle, rng) -> AdversaryOutput:
    """Returns the argument untouched as the certificate; keeps no notes."""
    return AdversaryOutput(state, {})


def measure_subspace_register(state: SparseState, oracle, rng) -> AdversaryOutput:
    """Measures the subspace register computationally, then tries to delete."""
    res = statevec.measure(state, "A", rng)
    return AdversaryOutput(res.post, {"a": res.outcome.val})


def measure_full_transcript(state: SparseState, oracle, rng) -> AdversaryOutput:
    """Collapses every register and archives the classical transcript."""
    st = state
    memo = {}
    for reg, _ in state.layout.regs:
        res = statevec.measure(st, reg, rng)
        st = res.post
        memo[reg.lower()] = res.outcome.val
    return AdversaryOutput(st, memo)


def parity_memo_adversary(u: F2Vec) -> Callable:
    """Measures one parity of the subspace register and notes the bit.

    A half-collapsing measurement: deletion still succeeds with constant
    probability, and the noted bit has matching statistics in the real and
    simulated experiments.
    """

    def fn(state: SparseState, oracle, rng) -> AdversaryOutput:
        layout = state.layout
        p1 = sum(
            abs(a) ** 2
            for label, a in state.amps.items()
            if (layout.extract(label, "A") & u.val).bit_count() & 1
        )
        bit = 1 if float(rng.random()) < p1 else 0
        keep = {
            label: a
            for label, a in state.amps.items()
            if ((layout.extract(label, "A") & u.val).bit_count() & 1) == bit
        }
        norm = sum(abs(a) ** 2 for a in keep.values()) ** 0.5
        post = SparseState(layout, {l: a / norm for l, a in keep.items()})
        return AdversaryOutput(post, {"parity": bit})

    return fn


def zeros_adversary(state: SparseState, oracle, rng) -> AdversaryOutput:
    """Keeps the argument and hands back freshly zeroed registers."""
    return AdversaryOutput(basis_state(state.layout), {"kept_state": True})


# --- adaptive-deletion game (view: AdpDelView) -------------------------------
#
# Answers are per-index tuples (f, out_bits, y, d1, d2); the challenger
# checks y in {x0, x1} and c = d1.(x0^x1) xor d2.(f(x0)^f(x1)).


def _pivot_parity_vector(diff: int, target: int) -> int:
    """A d with parity(d & diff) == target, via the top set bit of diff."""
    return (1 << (diff.bit_length() - 1)) if target else 0


def _adp_cheat(view, rng):
    answers = []
    for x0, x1, c in view.secrets:
        answers.append((lambda x: 0, 1, x0, _pivot_parity_vector(x0 ^ x1, c), 0))
    return answers


def _adp_cheat_exact(view, i) -> float:
    return 1.0


def _adp_computational(view, rng):
    answers = []
    for st in view.states:
        outcome, _, _, _ = statevec.measure(st, "X", rng)
        d1 = rand_bits(rng, view.lam_x)
        answers.append((lambda x: 0, 1, outcome.val, d1, 0))
    return answers


def _adp_computational_exact(view, i) -> float:
    # y is always valid; f is constant so only d1.(x0 ^ x1) = c counts,
    # and exactly half of all d1 satisfy it
    x0, x1, c = view.secrets[i]
    diff = x0 ^ x1
    good = sum(1 for d in range(1 << view.lam_x) if ((d & diff).bit_count() & 1) == c)
    return good / (1 << view.lam_x)


def _adp_hadamard(view, rng):
    answers = []
    for st in view.states:
        d = statevec.measure_hadamard_pair(st, rng)
        y = rand_bits(rng, view.lam_x)
        answers.append((lambda x: x, view.lam_x, y, d.val, 0))
    return answers


def _adp_hadamard_exact(view, i) -> float:
    # d1 is always parity-correct; y is a uniform guess over the strings
    x0, x1, _ = view.secrets[i]
    good = sum(1 for y in range(1 << view.lam_x) if y in (x0, x1))
    return good / (1 << view.lam_x)


ADP_DEL_STRATEGIES = {
    "oracle-cheat": Strategy(
        "oracle-cheat", _adp_cheat, needs_secrets=True, f_mode="pre-committed",
        meta={"exact_index_prob": _adp_cheat_exact},
    ),
    "computational": Strategy(
        "computational", _adp_computational, f_mode="pre-committed",
        meta={"exact_index_prob": _adp_computational_exact},
    ),
    "hadamard": Strategy(
        "hadamard", _adp_hadamard, f_mode="post-state",
        meta={"exact_index_prob": _adp_hadamard_exact},
    ),
}


# --- double-extraction game (view: DoubleExtView) ------------------------------


def _dx_measure_and_guess(view, rng):
    st = view.state
    if view.with_indicator:
        res = statevec.measure(st, "B", rng)
        xres = statevec.measure(res.post, "X", rng)
        known_slot, known = res.outcome.val, xres.outcome.val
    else:
        xres = statevec.measure(st, "X", rng)
        known, known_slot = xres.outcome.val, None
    guess = rand_bits(rng, view.lam_x)
    if known_slot == 1:
        return guess, known
    return known, guess


def _dx_cheat(view, rng):
    return view.secrets


def _dx_measure_twice(view, rng):
    if view.with_indicator:
        res = statevec.measure(view.state, "X", rng)
        v = res.outcome.val
    else:
        v = statevec.measure(view.state, "X", rng).outcome.val
    return v, v


DOUBLE_EXT_STRATEGIES = {
    "measure-and-guess": Strategy("measure-and-guess", _dx_measure_and_guess),
    "oracle-cheat": Strategy("oracle-cheat", _dx_cheat, needs_secrets=True),
    "measure-twice": Strategy("measure-twice", _dx_measure_twice),
}


# --- direct-product game (view: DphView) ----------------------------------------


def _dph_measure_computational(view, rng):
    v1 = statevec.measure(view.state, "A", rng).outcome.val
    v2 = rand_bits(rng, view.lam)
    return v1, v2


def _dph_measure_hadamard(view, rng):
    st = statevec.hadamard(view.state, "A")
    v2 = statevec.measure(st, "A", rng).outcome.val
    v1 = rand_bits(rng, view.lam)
    return v1, v2


def _dph_measure_half(view, rng):
    # collapse the first half computationally, transform and read the rest
    lam = view.lam
    half = lam // 2
    layout = view.state.layout
    st = view.state
    # split measurement via parities of the top-half coordinates
    top_mask = ((1 << half) - 1) << (lam - half)
    probs: dict[int, float] = {}
    for label, amp in st.amps.items():
        probs[label & top_mask] = probs.get(label & top_mask, 0.0) + abs(amp) ** 2
    u = float(rng.random())
    acc, chosen = 0.0, max(probs)
    for v in sorted(probs):
        acc += probs[v]
        if u <= acc:
            chosen = v
            break
    kept = {l: a for l, a in st.amps.items() if (l & top_mask) == chosen}
    norm = sum(abs(a) ** 2 for a in kept.values()) ** 0.5
    st = SparseState(layout, {l: a / norm for l, a in kept.items()})
    h = statevec.hadamard(st, "A")
    hx = statevec.measure(h, "A", rng).outcome.val
    v1 = chosen | rand_bits(rng, lam - half)
    v2 = (hx & ~top_mask) | (rand_bits(rng, half) << (lam - half))
    return v1, v2


def _dph_cheat(view, rng):
    from ..f2lin import dual

    return view.secrets.basis[0].val, dual(view.secrets).basis[0].val


DPH_STRATEGIES = {
    "measure-computational": Strategy("measure-computational", _dph_measure_computational),
    "measure-hadamard": Strategy("measure-hadamard", _dph_measure_hadamard),
    "measure-half": Strategy("measure-half", _dph_measure_half),
    "oracle-cheat": Strategy("oracle-cheat", _dph_cheat, needs_secrets=True),
}


# --- soundness game (view: vk, aux, dummy signature) ------------------------------


def _sound_replay(vk, aux, dummy_sig, rng):
    """Relabels the dummy signature for a new message, fixing the first share."""
    from ..sig_cden import OTSignature

    m_dummy = aux["m_dummy"]
    m = m_dummy ^ 1
    shares = (dummy_sig.shares[0] ^ m ^ m_dummy,) + dummy_sig.shares[1:]
    return m, OTSignature(dummy_sig.states, shares, None)


def _sound_cheat_forger(vk, aux, dummy_sig, rng):
    """Holds the signing key (harness self-test) and signs a fresh message."""
    from ..sig_cden import ot_sign

    m = aux["m_dummy"] ^ 1
    sig, _ = ot_sign(aux["scheme"], aux["secrets"], m, rng)
    return m, sig


SOUNDNESS_ADVERSARIES = {
    "replay": Strategy("replay", _sound_replay),
    "oracle-cheat": Strategy("oracle-cheat", _sound_cheat_forger, needs_secrets=True),
}


def _ver_honest(vk, aux, m, register, rng):
    from ..sig_cden import ot_verify

    prob, _ = ot_verify(aux["scheme"], vk, m, register)
    return float(rng.random()) < prob


def _ver_honest_exact(vk, aux, m, register) -> float:
    from ..sig_cden import ot_verify

    return ot_verify(aux["scheme"], vk, m, register)[0]


def _ver_always_accept(vk, aux, m, register, rng):
    return True


SOUNDNESS_VERIFIERS = {
    "honest": Strategy(
        "honest", _ver_honest, meta={"exact_accept_prob": _ver_honest_exact}
    ),
    "always-accept": Strategy(
        "always-accept", _ver_always_accept,
        meta={"exact_accept_prob": lambda vk, aux, m, register: 1.0},
    ),
}


DENIABILITY_ADVERSARIES = {
    "honest-deleter": Strategy("honest-deleter", honest_deleter),
    "measure-subspace": Strategy("measure-subspace", measure_subspace_register),
    "measure-transcript": Strategy("measure-transcript", measure_full_transcript),
    "zeros": Strategy("zeros", zeros_adversary),
}
