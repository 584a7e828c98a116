"""Binary linear codes over GF(2) and exhaustive erasure+flip decoding.

Codeword tables are stored as packed ``uint64`` words (bit ``j % 64`` of word
``j // 64`` holds coordinate ``j``) so enumeration and distance computations
reduce to word-level XOR and popcount.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channels import ERASURE

MAX_ENUM_K = 24
MAX_DECODE_K = 20


class CodeError(ValueError):
    pass


# --- GF(2) matrix helpers -------------------------------------------------

def gf2_rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    a = (np.array(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        a[hit] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_rank(m: np.ndarray) -> int:
    if np.asarray(m).size == 0:
        return 0
    return len(gf2_rref(m)[1])


def gf2_nullspace(m: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {v : m v = 0} over GF(2)."""
    m = np.asarray(m, dtype=np.uint8)
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=np.uint8)
    rref, pivots = gf2_rref(m)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, p in enumerate(pivots):
            basis[i, p] = rref[r, f]
    return basis


def gf2_independent_rows(m: np.ndarray) -> np.ndarray:
    """Indices of a maximal independent subset of rows, scanned in order."""
    m = np.asarray(m, dtype=np.uint8)
    _, pivots = gf2_rref(m.T)
    return np.array(pivots, dtype=int)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    words = (n + 63) // 64
    padded = np.zeros(bits.shape[:-1] + (words * 64,), dtype=np.uint8)
    padded[..., :n] = bits
    as_bytes = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view(np.uint64).reshape(bits.shape[:-1] + (words,))


def unpack_bits(packed: np.ndarray, n: int) -> np.ndarray:
    packed = np.ascontiguousarray(packed, dtype=np.uint64)
    as_bytes = packed.view(np.uint8).reshape(packed.shape[:-1] + (-1,))
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :n]


def popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


# --- codes ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BinaryLinearCode:
    name: str
    generator: np.ndarray
    parity_check: np.ndarray
    d: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=np.uint8) & 1
        h = np.asarray(self.parity_check, dtype=np.uint8) & 1
        n = g.shape[1] if g.ndim == 2 and g.shape[1] else h.shape[1]
        g = g.reshape(-1, n)
        h = h.reshape(-1, n)
        if g.shape[0] + h.shape[0] != n:
            raise CodeError(f"generator rows {g.shape[0]} + check rows {h.shape[0]} != n = {n}")
        if gf2_rank(g) != g.shape[0] or gf2_rank(h) != h.shape[0]:
            raise CodeError("generator and parity-check matrices must have full row rank")
        if g.shape[0] and h.shape[0] and np.any((g.astype(np.int64) @ h.T.astype(np.int64)) & 1):
            raise CodeError("G H^T != 0 over GF(2)")
        g.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "parity_check", h)

    @classmethod
    def from_generator(cls, name: str, g: np.ndarray, **kw) -> "BinaryLinearCode":
        g = np.asarray(g, dtype=np.uint8)
        return cls(name, g, gf2_nullspace(g), **kw)

    @classmethod
    def from_parity_check(cls, name: str, h: np.ndarray, **kw) -> "BinaryLinearCode":
        h = np.asarray(h, dtype=np.uint8)
        h = h[gf2_independent_rows(h)]
        return cls(name, gf2_nullspace(h), h, **kw)

    @property
    def n(self) -> int:
        return self.generator.shape[1]

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def codeword_table(self) -> np.ndarray:
        """All 2^k codewords, packed; row m is the encoding of message bits of m (LSB first)."""
        if self.k > MAX_ENUM_K:
            raise CodeError(f"k = {self.k} too large for exhaustive enumeration (max {MAX_ENUM_K})")
        rows = pack_bits(self.generator)
        table = np.zeros((1, rows.shape[1] if rows.size else (self.n + 63) // 64), dtype=np.uint64)
        for g in rows:
            table = np.concatenate([table, table ^ g])
        return table

    def with_distance(self) -> "BinaryLinearCode":
        if self.d is not None:
            return self
        return BinaryLinearCode(self.name, self.generator, self.parity_check,
                                compute_distance(self), dict(self.meta))

    def __repr__(self) -> str:
        return f"BinaryLinearCode({self.name!r}, n={self.n}, k={self.k}, d={self.d})"


def encode(code: BinaryLinearCode, message) -> np.ndarray:
    """message . G over GF(2); accepts a single message or a (batch, k) array."""
    m = np.asarray(message, dtype=np.uint8)
    if m.shape[-1] != code.k:
        raise CodeError(f"message length {m.shape[-1]} != k = {code.k}")
    if code.k == 0:
        return np.zeros(m.shape[:-1] + (code.n,), dtype=np.uint8)
    # float32 matmul is exact for column sums below 2^24
    prod = m.astype(np.float32) @ code.generator.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def syndrome(code: BinaryLinearCode, word) -> np.ndarray:
    w = np.asarray(word, dtype=np.int64)
    return (w @ code.parity_check.T.astype(np.int64)) & 1


def compute_distance(code: BinaryLinearCode) -> int:
    """Minimum weight of a nonzero codeword, by enumerating all 2^k codewords."""
    if code.k > MAX_ENUM_K:
        raise CodeError(f"k = {code.k} too large for exhaustive distance (max {MAX_ENUM_K})")
    if code.k == 0:
        return code.n + 1  # no nonzero codeword: detects every pattern
    weights = popcount(code.codeword_table[1:])
    return int(weights.min())


# --- decoding -----------------------------------------------------------------

@dataclass(frozen=True)
class DecodeResult:
    status: str
    codeword: np.ndarray | None
    corrected_erasures: int
    corrected_flips: int
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "decoded"


def _check_received(code: BinaryLinearCode, received) -> np.ndarray:
    r = np.asarray(received)
    if r.dtype.kind in "US" or r.dtype == object:
        r = np.array([ERASURE if str(s).upper() == "E" else int(s) for s in r.ravel()]).reshape(r.shape)
    r = r.astype(np.int8)
    if r.shape[-1] != code.n:
        raise CodeError(f"received length {r.shape[-1]} != n = {code.n}")
    if np.any((r < 0) | (r > ERASURE)):
        raise CodeError("received symbols must be 0, 1 or E")
    return r


def decode_erasure_flip_batch(code: BinaryLinearCode, received: np.ndarray,
                              chunk_cells: int = 1 << 22) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-codeword decoding on non-erased coordinates for a batch of words.

    Returns ``(ok, codewords)``; ``ok`` is False where the minimum distance is
    attained by more than one codeword.
    """
    if code.k > MAX_DECODE_K:
        raise CodeError(f"k = {code.k} too large for exhaustive decoding (max {MAX_DECODE_K})")
    r = _check_received(code, np.atleast_2d(received))
    table = code.codeword_table
    bits = pack_bits((r == 1).astype(np.uint8))
    keep = pack_bits((r != ERASURE).astype(np.uint8))
    ok = np.empty(len(r), dtype=bool)
    best = np.empty(len(r), dtype=np.int64)
    step = max(1, chunk_cells // len(table))
    for s in range(0, len(r), step):
        diff = (table[None, :, :] ^ bits[s:s + step, None, :]) & keep[s:s + step, None, :]
        dist = popcount(diff)
        idx = np.argmin(dist, axis=1)
        dmin = dist[np.arange(len(idx)), idx]
        ok[s:s + step] = (dist == dmin[:, None]).sum(axis=1) == 1
        best[s:s + step] = idx
    return ok, unpack_bits(table[best], code.n)


def decode_erasure_flip(code: BinaryLinearCode, received) -> DecodeResult:
    r = _check_received(code, received)
    ok, cw = decode_erasure_flip_batch(code, r[None, :])
    erasures = int(np.sum(r == ERASURE))
    if not ok[0]:
        return DecodeResult("failure", None, 0, 0)
    cw = cw[0]
    flips = int(np.sum((r != ERASURE) & (r != cw)))
    return DecodeResult("decoded", cw, erasures, flips)


# --- families ----------------------------------------------------------------

def repetition(n: int) -> BinaryLinearCode:
    return BinaryLinearCode.from_generator(f"repetition({n})", np.ones((1, n), dtype=np.uint8))


def parity(n: int) -> BinaryLinearCode:
    g = np.concatenate([np.eye(n - 1, dtype=np.uint8), np.ones((n - 1, 1), dtype=np.uint8)], axis=1)
    return BinaryLinearCode(f"parity({n})", g, np.ones((1, n), dtype=np.uint8))


HAMMING74_G = np.array([
    [1, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)


def hamming74() -> BinaryLinearCode:
    p = HAMMING74_G[:, 4:]
    h = np.concatenate([p.T, np.eye(3, dtype=np.uint8)], axis=1)
    return BinaryLinearCode("hamming74", HAMMING74_G, h)


def extended_hamming84() -> BinaryLinearCode:
    g = np.concatenate([HAMMING74_G, HAMMING74_G.sum(axis=1, keepdims=True) % 2], axis=1)
    return BinaryLinearCode.from_generator("extended_hamming84", g)


def trivial(n: int) -> BinaryLinearCode:
    """The zero code {0...0}."""
    return BinaryLinearCode(f"trivial({n})", np.zeros((0, n), dtype=np.uint8), np.eye(n, dtype=np.uint8))


def uncoded(n: int) -> BinaryLinearCode:
    return BinaryLinearCode(f"uncoded({n})", np.eye(n, dtype=np.uint8), np.zeros((0, n), dtype=np.uint8))


_ALIASES = {
    "rep": "repetition",
    "hamming84": "extended_hamming84",
    "ldpc": "random_ldpc",
}


def make_family(name: str, *params: int) -> BinaryLinearCode:
    """Build a named code family; distance is filled in whenever k is small enough to enumerate."""
    from .ldpc import random_ldpc

    name = _ALIASES.get(name, name)
    builders = {
        "repetition": (repetition, 1),
        "parity": (parity, 1),
        "hamming74": (hamming74, 0),
        "extended_hamming84": (extended_hamming84, 0),
        "trivial": (trivial, 1),
        "uncoded": (uncoded, 1),
        "random_ldpc": (random_ldpc, 4),
    }
    if name not in builders:
        raise CodeError(f"unknown code family {name!r}")
    fn, arity = builders[name]
    if len(params) != arity:
        raise CodeError(f"{name} takes {arity} parameter(s), got {len(params)}")
    if name in ("repetition", "parity", "trivial", "uncoded") and params[0] < 1 + (name == "parity"):
        raise CodeError(f"invalid block length for {name}: {params[0]}")
    code = fn(*params)
    if code.k <= MAX_ENUM_K:
        code = code.with_distance()
    return code


_DESCRIPTOR = re.compile(r"^\s*([a-z_]+?)(\d+)?\s*(?:\(([^)]*)\))?\s*$")


def parse_code(descriptor: str) -> BinaryLinearCode:
    """Resolve strings such as ``rep3``, ``repetition(5)``, ``parity(4)``,
    ``hamming74`` or ``random_ldpc(1024,6,3,7)``."""
    desc = descriptor.strip().lower()
    if desc in ("hamming74", "extended_hamming84", "hamming84"):
        return make_family(desc)
    m = _DESCRIPTOR.match(desc)
    if not m:
        raise CodeError(f"cannot parse code descriptor {descriptor!r}")
    name, suffix, args = m.groups()
    params: list[int] = []
    if suffix:
        params.append(int(suffix))
    if args:
        try:
            params += [int(a) for a in args.split(",") if a.strip()]
        except ValueError as exc:
            raise CodeError(f"non-integer parameter in {descriptor!r}") from exc
    return make_family(name, *params)
