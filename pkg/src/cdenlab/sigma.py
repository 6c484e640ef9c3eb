"""Schnorr identification over a small prime-order subgroup.

Honest prover, verifier, perfect HVZK simulator, and special-soundness
extractor. The protocol proves knowledge of w with x = g^w mod p; it is the
three-message protocol plugged into the Fiat-Shamir constructions. At desk
scale the parameters carry no cryptographic hardness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupParams",
    "Transcript",
    "DEFAULT_PARAMS",
    "keygen",
    "p1",
    "p3",
    "verify",
    "simulate",
    "extract",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Prime modulus p, prime subgroup order q dividing p-1, generator g."""

    p: int
    q: int
    g: int

    def __post_init__(self):
        if not _is_prime(self.p) or not _is_prime(self.q):
            raise ValueError("p and q must be prime")
        if (self.p - 1) % self.q != 0:
            raise ValueError("q must divide p-1")
        if self.g in (0, 1) or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g must generate the order-q subgroup")

    @property
    def elem_bits(self) -> int:
        """Bits needed to encode a group element (for register embedding)."""
        return self.p.bit_length()

    @property
    def scalar_bits(self) -> int:
        return self.q.bit_length()

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "g": self.g}

    @classmethod
    def from_json(cls, d: dict) -> "GroupParams":
        return cls(d["p"], d["q"], d["g"])


DEFAULT_PARAMS = GroupParams(p=23, q=11, g=2)


@dataclass(frozen=True)
class Transcript:
    s1: int
    s2: int
    s3: int

    def to_json(self) -> dict:
        return {"s1": self.s1, "s2": self.s2, "s3": self.s3}


def keygen(params: GroupParams, rng: np.random.Generator) -> tuple[int, int]:
    """Sample a statement/witness pair: w uniform in Z_q \\ {0}, x = g^w."""
    w = int(rng.integers(1, params.q))
    return pow(params.g, w, params.p), w


def p1(params: GroupParams, x: int, w: int, r: int) -> int:
    """First prover message s1 = g^r."""
    if not 0 <= r < params.q:
        raise ValueError("commitment randomness out of range")
    return pow(params.g, r, params.p)


def p3(params: GroupParams, x: int, w: int, r: int, s2: int) -> int:
    """Response s3 = r + s2 * w mod q."""
    if not 0 <= r < params.q or not 0 <= s2 < params.q:
        raise ValueError("input out of range")
    return (r + s2 * w) % params.q


def verify(params: GroupParams, x: int, t: Transcript) -> bool:
    """Check g^s3 == s1 * x^s2 mod p."""
    if not (0 < t.s1 < params.p and 0 <= t.s2 < params.q and 0 <= t.s3 < params.q):
        return False
    return pow(params.g, t.s3, params.p) == (t.s1 * pow(x, t.s2, params.p)) % params.p


def simulate(params: GroupParams, x: int, s2: int, s3_rand: int) -> tuple[int, int]:
    """HVZK simulator: pick s3 from the supplied randomness, solve for s1.

    s1 = g^s3 * x^(-s2); the resulting transcript always verifies, and for
    Schnorr the simulated distribution over a uniform s3 equals the honest
    one exactly.
    """
    if not 0 <= s2 < params.q:
        raise ValueError("challenge out of range")
    s3 = s3_rand % params.q
    x_inv_s2 = pow(x, (params.q - s2) % params.q, params.p)
    s1 = (pow(params.g, s3, params.p) * x_inv_s2) % params.p
    return s1, s3


def extract(
    params: GroupParams, x: int, s1: int, s2: int, s3: int, s2p: int, s3p: int
) -> int:
    """Special-soundness extractor: w = (s3 - s3') / (s2 - s2') mod q."""
    if s2 % params.q == s2p % params.q:
        raise ValueError("challenges must differ")
    for t in (Transcript(s1, s2, s3), Transcript(s1, s2p, s3p)):
        if not verify(params, x, t):
            raise ValueError("transcript does not verify")
    num = (s3 - s3p) % params.q
    den_inv = pow((s2 - s2p) % params.q, params.q - 2, params.q)
    return (num * den_inv) % params.q
