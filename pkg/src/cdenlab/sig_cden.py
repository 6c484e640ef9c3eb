"""Signature schemes with certified deniability or certified deletion.

Four schemes share this module:

* ``fs_sig``: the Fiat-Shamir argument of :mod:`cdenlab.fs_cden` turned into
  a signature by fixing the oracle prefix to the message.
* the one-time scheme: per index, a two-term BB84-style superposition over a
  hidden pair of strings, each branch carrying a deterministic classical
  signature on a hash that binds the branch to a message share. Deletion
  measures each pair in the Hadamard basis; a parity equation checks the
  certificate against the hidden pair data.
* the many-time upgrade: wraps the one-time scheme with fresh per-signature
  keys, signs the one-time verification key under a global key, and ships
  the deletion key encrypted (stream cipher) and authenticated (keyed-hash
  MAC) so the signer stays stateless.
* a strawman scheme in the style of prior revocable signatures, where a
  fully classical signature survives deletion of the token; it feeds the
  evidence-collection demo.

The deterministic classical signature DS is Fiat-Shamir Schnorr with an
oracle-derived nonce, so signing the same message twice yields identical
signatures and verification is public.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .f2lin import F2Vec, rand_bits
from .fs_cden import (
    DelverResult,
    FSDeletionKey,
    FSParams,
    ProofState,
    del_cert,
    delver as fs_delver,
    prove as fs_prove,
    verify as fs_verify,
)
from .qrom import OracleTable, Prefix, reprogram
from . import sigma, statevec
from .sigma import DEFAULT_PARAMS, GroupParams
from .statevec import RegisterLayout, SparseState

__all__ = [
    "DSScheme",
    "DSKeys",
    "FSSigScheme",
    "fs_sig_gen",
    "fs_sig_sign",
    "fs_sig_verify",
    "fs_sig_del",
    "fs_sig_delver",
    "OTParams",
    "OTScheme",
    "OTSignature",
    "OTDeletionKey",
    "OTCertificate",
    "ot_gen",
    "ot_sign",
    "ot_verify",
    "ot_del",
    "ot_delver",
    "MultScheme",
    "MultKeys",
    "MultSignature",
    "MultCertificate",
    "mult_gen",
    "mult_sign",
    "mult_verify",
    "mult_del",
    "mult_delver",
    "ske_encrypt",
    "ske_decrypt",
    "mac_tag",
    "StrawmanScheme",
    "StrawSignature",
    "straw_sign",
    "straw_verify",
    "straw_del",
    "straw_delver",
    "straw_third_party_check",
]

DS_KEY_BITS = 16


# --- deterministic Schnorr Fiat-Shamir signatures (classical) ----------------


@dataclass(frozen=True)
class DSKeys:
    x: int  # verification key
    w: int  # signing key
    k_sig: int  # nonce-derivation key


@dataclass(frozen=True)
class DSScheme:
    """Classical deterministic signature over fixed-width messages."""

    group: GroupParams
    msg_bits: int
    nonce_oracle: OracleTable  # nonce = H(k_sig || m) mod q
    chal_oracle: OracleTable  # challenge = H(m || s1) mod q

    @classmethod
    def create(cls, group: GroupParams, msg_bits: int, seed: int) -> "DSScheme":
        nonce = OracleTable(seed ^ 0x6E6F6E63, DS_KEY_BITS + msg_bits, 16)
        chal = OracleTable(seed ^ 0x6368616C, msg_bits + group.elem_bits, 16)
        return cls(group, msg_bits, nonce, chal)

    @property
    def sig_bits(self) -> int:
        return self.group.elem_bits + self.group.scalar_bits

    def gen(self, rng: np.random.Generator) -> DSKeys:
        x, w = sigma.keygen(self.group, rng)
        return DSKeys(x, w, rand_bits(rng, DS_KEY_BITS))

    def sign(self, keys: DSKeys, m: int) -> int:
        g = self.group
        r = self.nonce_oracle.query((keys.k_sig << self.msg_bits) | m) % g.q
        s1 = sigma.p1(g, keys.x, keys.w, r)
        c = self.chal_oracle.query((m << g.elem_bits) | s1) % g.q
        s3 = sigma.p3(g, keys.x, keys.w, r, c)
        return (s1 << g.scalar_bits) | s3

    def verify(self, vk: int, m: int, sig: int) -> bool:
        g = self.group
        s1 = sig >> g.scalar_bits
        s3 = sig & ((1 << g.scalar_bits) - 1)
        c = self.chal_oracle.query((m << g.elem_bits) | s1) % g.q
        return sigma.verify(g, vk, sigma.Transcript(s1, c, s3))


# --- Fiat-Shamir signature with certified deniability --------------------------


@dataclass(frozen=True)
class FSSigScheme:
    """The coset-state argument under a per-message oracle prefix."""

    lam: int
    msg_bits: int
    oracle: OracleTable
    group: GroupParams = DEFAULT_PARAMS

    @classmethod
    def create(
        cls, lam: int, msg_bits: int, seed: int, group: GroupParams = DEFAULT_PARAMS
    ) -> "FSSigScheme":
        fsp = FSParams(lam, group)
        oracle = OracleTable(seed, msg_bits + fsp.oracle_in_bits, fsp.oracle_out_bits)
        return cls(lam, msg_bits, oracle, group)

    def message_view(self, m: int):
        return reprogram(self.oracle, Prefix(m, self.msg_bits))


def fs_sig_gen(scheme: FSSigScheme, rng: np.random.Generator) -> tuple[int, int]:
    """Key pair: vk = g^sk for a uniform nonzero sk."""
    x, w = sigma.keygen(scheme.group, rng)
    return x, w


def fs_sig_sign(
    scheme: FSSigScheme, sk: int, m: int, rng: np.random.Generator
) -> tuple[ProofState, FSDeletionKey]:
    vk = pow(scheme.group.g, sk, scheme.group.p)
    return fs_prove(vk, sk, scheme.message_view(m), scheme.lam, rng, scheme.group)


def fs_sig_verify(
    scheme: FSSigScheme, vk: int, m: int, pf: ProofState
) -> tuple[float, Optional[ProofState]]:
    return fs_verify(vk, pf, scheme.message_view(m), scheme.group)


def fs_sig_del(pf: ProofState) -> ProofState:
    return del_cert(pf)


def fs_sig_delver(
    scheme: FSSigScheme,
    dk: FSDeletionKey,
    cert: ProofState,
    vk: int,
    m: int,
    rng: np.random.Generator,
) -> DelverResult:
    return fs_delver(dk, cert, vk, scheme.message_view(m), rng, scheme.group)


# --- one-time scheme with classical certificates ---------------------------------


@dataclass(frozen=True)
class OTParams:
    lam_x: int = 8  # hidden string width per index
    ell: int = 8  # repetition count
    msg_bits: int = 8  # message and share width
    m_dummy: int = 0
    group: GroupParams = DEFAULT_PARAMS

    def __post_init__(self):
        if self.lam_x > 16:
            raise ValueError("hidden string width cap is 16 bits")
        if self.ell < 1:
            raise ValueError("at least one index required")
        if not 0 <= self.m_dummy < (1 << self.msg_bits):
            raise ValueError("dummy message out of range")

    @property
    def idx_bits(self) -> int:
        # indices are encoded zero-based in ceil(log2 ell) bits
        return max(1, (self.ell - 1).bit_length())

    @property
    def hash_in_bits(self) -> int:
        return self.lam_x + self.msg_bits + self.idx_bits


@dataclass(frozen=True)
class OTScheme:
    params: OTParams
    hash_oracle: OracleTable  # binds branch strings to shares: H(x || m_i || i)
    ds: DSScheme

    @classmethod
    def create(cls, params: OTParams, seed: int) -> "OTScheme":
        h = OracleTable(seed ^ 0x62623834, params.hash_in_bits, 16)
        ds = DSScheme.create(params.group, h.out_bits, seed ^ 0x64736967)
        return cls(params, h, ds)

    @property
    def sig_bits(self) -> int:
        return self.ds.sig_bits

    def index_layout(self) -> RegisterLayout:
        return RegisterLayout([("X", self.params.lam_x), ("S", self.sig_bits)])

    def hash_input(self, x: int, share: int, i: int) -> int:
        p = self.params
        return (((x << p.msg_bits) | share) << p.idx_bits) | i


@dataclass(frozen=True)
class OTDeletionKey:
    a1: tuple[int, ...]  # x0 xor x1 per index
    a2: tuple[int, ...]  # sigma0 xor sigma1 per index
    c: tuple[int, ...]  # hidden phases

    def to_json(self) -> dict:
        return {
            "a1": [format(v, "x") for v in self.a1],
            "a2": [format(v, "x") for v in self.a2],
            "c": list(self.c),
        }

    @classmethod
    def from_json(cls, d: dict) -> "OTDeletionKey":
        return cls(
            tuple(int(v, 16) for v in d["a1"]),
            tuple(int(v, 16) for v in d["a2"]),
            tuple(int(b) for b in d["c"]),
        )


@dataclass(frozen=True)
class OTClear:
    """The revealing payload attached to signatures on the dummy message."""

    x0: tuple[int, ...]
    x1: tuple[int, ...]
    dk: OTDeletionKey


@dataclass(frozen=True)
class OTSignature:
    states: tuple[SparseState, ...]  # per-index two-term states, kept factored
    shares: tuple[int, ...]
    clear: Optional[OTClear] = None


@dataclass(frozen=True)
class OTCertificate:
    d1: tuple[int, ...]
    d2: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "d1": [format(v, "x") for v in self.d1],
            "d2": [format(v, "x") for v in self.d2],
        }


def ot_gen(scheme: OTScheme, rng: np.random.Generator) -> DSKeys:
    return scheme.ds.gen(rng)


def ot_sign(
    scheme: OTScheme, keys: DSKeys, m: int, rng: np.random.Generator
) -> tuple[OTSignature, OTDeletionKey]:
    """Per index, a hidden pair state with branch signatures on bound hashes."""
    p = scheme.params
    if not 0 <= m < (1 << p.msg_bits):
        raise ValueError("message out of range")
    shares = [rand_bits(rng, p.msg_bits) for _ in range(p.ell - 1)]
    last = m
    for sh in shares:
        last ^= sh
    shares.append(last)

    layout = scheme.index_layout()
    states = []
    a1, a2, cs, x0s, x1s = [], [], [], [], []
    amp = 1.0 / math.sqrt(2.0)
    for i in range(p.ell):
        x0 = rand_bits(rng, p.lam_x)
        x1 = rand_bits(rng, p.lam_x)
        while x1 == x0:  # degenerate pair: resample
            x1 = rand_bits(rng, p.lam_x)
        c = rand_bits(rng, 1)
        s0 = scheme.ds.sign(keys, scheme.hash_oracle.query(scheme.hash_input(x0, shares[i], i)))
        s1 = scheme.ds.sign(keys, scheme.hash_oracle.query(scheme.hash_input(x1, shares[i], i)))
        states.append(
            SparseState(
                layout,
                {
                    layout.pack({"X": x0, "S": s0}): amp,
                    layout.pack({"X": x1, "S": s1}): amp * (-1.0) ** c,
                },
            )
        )
        a1.append(x0 ^ x1)
        a2.append(s0 ^ s1)
        cs.append(c)
        x0s.append(x0)
        x1s.append(x1)

    dk = OTDeletionKey(tuple(a1), tuple(a2), tuple(cs))
    clear = OTClear(tuple(x0s), tuple(x1s), dk) if m == p.m_dummy else None
    return OTSignature(tuple(states), tuple(shares), clear), dk


def _coherent_predicate(
    st: SparseState, predicate
) -> tuple[float, Optional[SparseState]]:
    """Born probability of a two-register predicate and the accept branch."""
    extended = RegisterLayout(list(st.layout.regs) + [("V", 1)])
    lifted = SparseState(extended, {l << 1: a for l, a in st.amps.items()})
    regs = [n for n, _ in st.layout.regs]
    computed = statevec.apply_classical_isometry(lifted, regs, "V", predicate)
    prob = sum(abs(a) ** 2 for l, a in computed.amps.items() if l & 1)
    if prob < 1e-24:
        return 0.0, None
    scale = 1.0 / prob**0.5
    post = SparseState(
        st.layout, {l >> 1: a * scale for l, a in computed.amps.items() if l & 1}
    )
    return prob, post


def ot_verify(
    scheme: OTScheme, vk: int, m: int, sig: OTSignature
) -> tuple[float, Optional[OTSignature]]:
    """Share-sum check, then coherent per-index signature verification.

    The acceptance probability is the product of per-index Born
    probabilities; on honest signatures it is one and the state is
    undisturbed.
    """
    p = scheme.params
    if len(sig.shares) != p.ell:
        raise ValueError("share count mismatch")
    total = 0
    for sh in sig.shares:
        total ^= sh
    if total != m:
        return 0.0, None
    prob = 1.0
    posts = []
    for i, st in enumerate(sig.states):
        share = sig.shares[i]

        def predicate(x: int, s: int, _share=share, _i=i) -> int:
            h = scheme.hash_oracle.query(scheme.hash_input(x, _share, _i))
            return 1 if scheme.ds.verify(vk, h, s) else 0

        pi, post = _coherent_predicate(st, predicate)
        prob *= pi
        if post is None:
            return 0.0, None
        posts.append(post)
    return prob, OTSignature(tuple(posts), sig.shares, sig.clear)


def ot_del(sig: OTSignature, rng: np.random.Generator) -> OTCertificate:
    """Hadamard-basis measurement of every index pair; consumes the state."""
    d1, d2 = [], []
    for st in sig.states:
        sig_bits = st.layout.width("S")
        d = statevec.measure_hadamard_pair(st, rng)
        d1.append(d.val >> sig_bits)
        d2.append(d.val & ((1 << sig_bits) - 1))
    return OTCertificate(tuple(d1), tuple(d2))


def ot_delver(dk: OTDeletionKey, cert: OTCertificate) -> bool:
    """The parity equation d1.a1 xor d2.a2 = c must hold at every index."""
    if len(cert.d1) != len(dk.a1) or len(cert.d2) != len(dk.a2):
        raise ValueError("index count mismatch")
    for d1, d2, a1, a2, c in zip(cert.d1, cert.d2, dk.a1, dk.a2, dk.c):
        parity = ((d1 & a1).bit_count() + (d2 & a2).bit_count()) & 1
        if parity != c:
            return False
    return True


# --- one-time to many-time upgrade --------------------------------------------------


def _keystream(seed: int, nonce: int, nbytes: int) -> bytes:
    ks = OracleTable(seed, 64, 64)
    out = bytearray()
    ctr = 0
    while len(out) < nbytes:
        out += ks.query(((nonce & 0xFFFFFFFF) << 32) | ctr).to_bytes(8, "big")
        ctr += 1
    return bytes(out[:nbytes])


def ske_encrypt(seed: int, data: bytes, rng: np.random.Generator) -> bytes:
    """Stream-cipher encryption with a fresh nonce; ciphertexts look random."""
    nonce = rand_bits(rng, 32)
    ks = _keystream(seed, nonce, len(data))
    return nonce.to_bytes(4, "big") + bytes(a ^ b for a, b in zip(data, ks))


def ske_decrypt(seed: int, ct: bytes) -> bytes:
    if len(ct) < 4:
        raise ValueError("ciphertext too short")
    nonce = int.from_bytes(ct[:4], "big")
    body = ct[4:]
    ks = _keystream(seed, nonce, len(body))
    return bytes(a ^ b for a, b in zip(body, ks))


def mac_tag(seed: int, data: bytes) -> str:
    import hashlib

    return hashlib.blake2b(data, key=seed.to_bytes(8, "big"), digest_size=16).hexdigest()


@dataclass(frozen=True)
class MultScheme:
    ot: OTScheme
    ds_global: DSScheme  # signs per-signature one-time verification keys

    @classmethod
    def create(cls, params: OTParams, seed: int) -> "MultScheme":
        ot = OTScheme.create(params, seed)
        ds_g = DSScheme.create(params.group, params.group.elem_bits, seed ^ 0x676C6F62)
        return cls(ot, ds_g)


@dataclass(frozen=True)
class MultKeys:
    ds_g: DSKeys
    sk_enc: int
    sk_mac: int

    @property
    def vk(self) -> int:
        return self.ds_g.x


@dataclass(frozen=True)
class MultSignature:
    ot_sig: OTSignature
    vk_ot: int
    sig_vk: int
    ct: bytes
    tag: str


@dataclass(frozen=True)
class MultCertificate:
    cert: OTCertificate
    ct: bytes
    tag: str


def mult_gen(scheme: MultScheme, rng: np.random.Generator) -> MultKeys:
    return MultKeys(scheme.ds_global.gen(rng), rand_bits(rng, 62), rand_bits(rng, 62))


def mult_sign(
    scheme: MultScheme, sk: MultKeys, m: int, rng: np.random.Generator
) -> MultSignature:
    ot_keys = ot_gen(scheme.ot, rng)
    sig_vk = scheme.ds_global.sign(sk.ds_g, ot_keys.x)
    ot_sig, dk = ot_sign(scheme.ot, ot_keys, m, rng)
    dk_bytes = json.dumps(dk.to_json(), sort_keys=True).encode()
    ct = ske_encrypt(sk.sk_enc, dk_bytes, rng)
    tag = mac_tag(sk.sk_mac, ct)
    return MultSignature(ot_sig, ot_keys.x, sig_vk, ct, tag)


def mult_verify(
    scheme: MultScheme, vk: int, m: int, msig: MultSignature
) -> tuple[float, Optional[MultSignature]]:
    if not scheme.ds_global.verify(vk, msig.vk_ot, msig.sig_vk):
        return 0.0, None
    prob, post = ot_verify(scheme.ot, msig.vk_ot, m, msig.ot_sig)
    if post is None:
        return 0.0, None
    return prob, MultSignature(post, msig.vk_ot, msig.sig_vk, msig.ct, msig.tag)


def mult_del(msig: MultSignature, rng: np.random.Generator) -> MultCertificate:
    return MultCertificate(ot_del(msig.ot_sig, rng), msig.ct, msig.tag)


def mult_delver(scheme: MultScheme, sk: MultKeys, mcert: MultCertificate) -> bool:
    """MAC first, then decrypt the deletion key and run the parity check."""
    if mac_tag(sk.sk_mac, mcert.ct) != mcert.tag:
        return False
    try:
        dk = OTDeletionKey.from_json(json.loads(ske_decrypt(sk.sk_enc, mcert.ct)))
        return ot_delver(dk, mcert.cert)
    except (ValueError, KeyError, json.JSONDecodeError):
        return False


# --- strawman scheme for the evidence-collection demo -------------------------------


@dataclass(frozen=True)
class StrawmanScheme:
    """Classical signature on a token id plus a deletable token.

    Deletion honestly destroys only the token; the classical signature
    survives as evidence. This is the definitional gap the deniability
    constructions close.
    """

    lam_x: int
    msg_bits: int
    token_oracle: OracleTable
    ds: DSScheme

    @classmethod
    def create(
        cls, lam_x: int, msg_bits: int, seed: int, group: GroupParams = DEFAULT_PARAMS
    ) -> "StrawmanScheme":
        tok = OracleTable(seed ^ 0x746F6B, lam_x, 16)
        ds = DSScheme.create(group, 2 * tok.out_bits + msg_bits, seed ^ 0x73747277)
        return cls(lam_x, msg_bits, tok, ds)

    def signed_payload(self, token_id: tuple[int, int], m: int) -> int:
        h0, h1 = token_id
        return (((h0 << self.token_oracle.out_bits) | h1) << self.msg_bits) | m


@dataclass(frozen=True)
class StrawSignature:
    sigma: int
    token_id: tuple[int, int]
    token: SparseState


@dataclass(frozen=True)
class StrawDeletionKey:
    diff: int  # x0 xor x1
    c: int


def straw_sign(
    scheme: StrawmanScheme, keys: DSKeys, m: int, rng: np.random.Generator
) -> tuple[StrawSignature, StrawDeletionKey]:
    x0 = rand_bits(rng, scheme.lam_x)
    x1 = rand_bits(rng, scheme.lam_x)
    while x1 == x0:
        x1 = rand_bits(rng, scheme.lam_x)
    c = rand_bits(rng, 1)
    token_id = (scheme.token_oracle.query(x0), scheme.token_oracle.query(x1))
    sig = scheme.ds.sign(keys, scheme.signed_payload(token_id, m))
    layout = RegisterLayout([("X", scheme.lam_x)])
    amp = 1.0 / math.sqrt(2.0)
    token = SparseState(layout, {x0: amp, x1: amp * (-1.0) ** c})
    return StrawSignature(sig, token_id, token), StrawDeletionKey(x0 ^ x1, c)


def straw_verify(
    scheme: StrawmanScheme, vk: int, m: int, sig: StrawSignature
) -> tuple[float, Optional[StrawSignature]]:
    """Honest verification needs both the classical part and the token."""
    if not scheme.ds.verify(vk, scheme.signed_payload(sig.token_id, m), sig.sigma):
        return 0.0, None

    def predicate(x: int) -> int:
        return 1 if scheme.token_oracle.query(x) in sig.token_id else 0

    prob, post = _coherent_predicate(sig.token, predicate)
    if post is None:
        return 0.0, None
    return prob, StrawSignature(sig.sigma, sig.token_id, post)


def straw_del(sig: StrawSignature, rng: np.random.Generator) -> int:
    return statevec.measure_hadamard_pair(sig.token, rng).val


def straw_delver(dk: StrawDeletionKey, d: int) -> bool:
    return ((d & dk.diff).bit_count() & 1) == dk.c


def straw_third_party_check(
    scheme: StrawmanScheme, vk: int, m: int, token_id: tuple[int, int], sig: int
) -> bool:
    """The archived-evidence verifier: accepts on the classical part alone."""
    return scheme.ds.verify(vk, scheme.signed_payload(token_id, m), sig)
