"""Quantum jump codes lifted from classical codes through the Hadamard transform.

A codeword x becomes H^{(x)n}|x>. Errors are products of A = X + iY (a heralded
jump, A = 2|0><1|) and B = I - Z (the first-order no-jump distortion) on
disjoint qubit sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channels import _check_gamma, build_ad
from .codes import BinaryLinearCode, compute_distance, unpack_bits
from .quantum import I2, X, Y, Z, adjoint, tensor

MAX_LIFT_N = 10
MAX_INFIDELITY_N = 7

A_OP = X + 1j * Y
B_OP = I2 - Z


class CodeSizeError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorPattern:
    a_positions: frozenset[int] = frozenset()
    b_positions: frozenset[int] = frozenset()

    @property
    def weight(self) -> tuple[int, int]:
        return len(self.a_positions), len(self.b_positions)

    @property
    def order(self) -> int:
        e, f = self.weight
        return e + 2 * f

    def __str__(self) -> str:
        parts = [f"A{q}" for q in sorted(self.a_positions)] + [f"B{q}" for q in sorted(self.b_positions)]
        return "*".join(parts) or "I"


@dataclass(frozen=True, eq=False)
class JumpCode:
    base: BinaryLinearCode
    basis: np.ndarray  # (K, 2^n), one row per codeword
    t: int

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dim(self) -> int:
        return 2 ** self.n

    @property
    def K(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis.conj()


def _codewords(code: BinaryLinearCode) -> np.ndarray:
    return unpack_bits(code.codeword_table, code.n)


def lift(code: BinaryLinearCode, t: int | None = None) -> JumpCode:
    """Code spanned by H^{(x)n}|x> over the codewords x; ``t`` defaults to d - 1."""
    if code.n > MAX_LIFT_N:
        raise CodeSizeError(f"n = {code.n} exceeds the dense-state limit {MAX_LIFT_N}")
    if t is None:
        d = code.d if code.d is not None else compute_distance(code)
        t = d - 1
    words = _codewords(code).astype(np.int64)
    n = code.n
    # qubit 0 is the most significant bit of a basis index
    ys = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    phase = (words @ ys.T) & 1
    basis = np.where(phase == 1, -1.0, 1.0).astype(complex) / np.sqrt(2.0 ** n)
    basis.setflags(write=False)
    return JumpCode(code, basis, int(t))


def apply_local(states: np.ndarray, ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Apply single-qubit operators to rows of ``states`` without forming 2^n x 2^n matrices."""
    out = np.asarray(states, dtype=complex).reshape((-1,) + (2,) * n)
    for q, op in ops.items():
        out = np.moveaxis(np.tensordot(op, out, axes=([1], [q + 1])), 0, q + 1)
    return out.reshape(-1, 2 ** n)


def _pattern_ops(pattern: ErrorPattern) -> dict[int, np.ndarray]:
    ops = {q: A_OP for q in pattern.a_positions}
    ops.update({q: B_OP for q in pattern.b_positions})
    return ops


def error_operator(pattern: ErrorPattern, n: int) -> np.ndarray:
    qubits = pattern.a_positions | pattern.b_positions
    if any(q < 0 or q >= n for q in qubits):
        raise IndexError(f"error pattern {pattern} has a qubit outside 0..{n - 1}")
    if pattern.a_positions & pattern.b_positions:
        raise ValueError("A and B supports must be disjoint")
    ops = _pattern_ops(pattern)
    return tensor(*(ops.get(q, I2) for q in range(n)))


def order_t_error_set(n: int, t: int) -> list[ErrorPattern]:
    """All patterns with e A-errors and f B-errors on disjoint qubits, e + 2f <= t."""
    if t < 0:
        raise ValueError("t must be non-negative")
    patterns = []
    for f in range(min(n, t // 2) + 1):
        for e in range(min(n - f, t - 2 * f) + 1):
            for b in itertools.combinations(range(n), f):
                rest = [q for q in range(n) if q not in b]
                for a in itertools.combinations(rest, e):
                    patterns.append(ErrorPattern(frozenset(a), frozenset(b)))
    patterns.sort(key=lambda p: (p.order, len(p.b_positions), sorted(p.a_positions), sorted(p.b_positions)))
    return patterns


@dataclass
class KLReport:
    passed: bool
    max_violation: float
    alpha: np.ndarray
    worst_pair: tuple[ErrorPattern, ErrorPattern] | None
    patterns: list[ErrorPattern] = field(repr=False, default_factory=list)
    tolerance: float = 1e-10


def verify_kl(qcode: JumpCode, tolerance: float = 1e-10, t: int | None = None,
              heralded: bool = True) -> KLReport:
    """Check <psi_i|E_mu^dag E_nu|psi_j> = alpha_{mu nu} delta_ij over the order-t error set.

    With ``heralded`` (the detected-jump channel) the jump record is part of
    each error, so pairs whose A-supports differ are orthogonal through the
    record register and have alpha = 0 automatically; only pairs with equal
    A-support are compared. ``heralded=False`` checks every pair, which is the
    condition for undetected amplitude damping.
    """
    t = qcode.t if t is None else t
    patterns = order_t_error_set(qcode.n, t)
    images = [apply_local(qcode.basis, _pattern_ops(p), qcode.n) for p in patterns]
    m = len(patterns)
    alpha = np.zeros((m, m), dtype=complex)
    worst, worst_pair = 0.0, None
    eye = np.eye(qcode.K)
    for mu in range(m):
        for nu in range(m):
            if heralded and patterns[mu].a_positions != patterns[nu].a_positions:
                continue
            gram = images[mu].conj() @ images[nu].T
            a = np.trace(gram) / qcode.K
            alpha[mu, nu] = a
            dev = float(np.max(np.abs(gram - a * eye)))
            if dev > worst:
                worst, worst_pair = dev, (patterns[mu], patterns[nu])
    return KLReport(worst < tolerance, worst, alpha, worst_pair, patterns, tolerance)


def kraus_expansion_check(gamma: float) -> tuple[float, float]:
    """Max-norm gaps |A_1 - (sqrt(gamma)/2) A| and |A_0 - (I - (gamma/4) B)|."""
    gamma = _check_gamma(gamma)
    if not 0.0 < gamma <= 0.5:
        raise ValueError("expansion check is defined for gamma in (0, 0.5]")
    a0, a1 = build_ad(gamma).kraus
    first = float(np.max(np.abs(a1 - np.sqrt(gamma) / 2 * A_OP)))
    second = float(np.max(np.abs(a0 - (I2 - gamma / 4 * B_OP))))
    return first, second


def record_kraus(gamma: float, record) -> np.ndarray:
    """Kraus operator of n detected-jump uses conditioned on the jump record."""
    a = build_ad(gamma).kraus
    return tensor(*(a[int(r)] for r in record))


@dataclass(frozen=True)
class RecoveryMap:
    """Trace-non-increasing operation R(rho) = sum_k R_k rho R_k^dagger."""

    kraus: tuple[np.ndarray, ...]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(r @ rho @ adjoint(r) for r in self.kraus)


def _inv_sqrt_psd(m: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    w, v = np.linalg.eigh((m + adjoint(m)) / 2)
    cut = rel_tol * max(w.max(), 0.0)
    inv = np.where(w > cut, 1.0 / np.sqrt(np.where(w > cut, w, 1.0)), 0.0)
    return (v * inv) @ adjoint(v)


def build_recovery(qcode: JumpCode, gamma: float, jump_record) -> RecoveryMap:
    """Transpose-channel recovery for the branch selected by ``jump_record``.

    With K the record's Kraus operator and P the code projector, the single
    recovery operator is P K^dagger sigma^{-1/2}, sigma = K P K^dagger, using
    the inverse square root on the support of sigma. Its adjoint image of the
    identity is the support projector of sigma, so the map is trace preserving
    on that support and trace decreasing off it.
    """
    gamma = _check_gamma(gamma)
    record = np.asarray(jump_record, dtype=int)
    if record.shape != (qcode.n,):
        raise ValueError(f"jump record must have {qcode.n} entries")
    if record.sum() > qcode.t:
        raise ValueError(f"record weight {record.sum()} exceeds correction order t = {qcode.t}")
    k = record_kraus(gamma, record)
    p = qcode.projector()
    sigma = k @ p @ adjoint(k)
    return RecoveryMap((p @ adjoint(k) @ _inv_sqrt_psd(sigma),))


def entanglement_infidelity(qcode: JumpCode, gamma: float) -> float:
    """1 - F_e of record-conditioned recovery after n detected-jump uses.

    The input is the maximally mixed code state; every record of weight at
    most t is recovered, heavier records count as total loss.
    """
    gamma = _check_gamma(gamma)
    if qcode.n > MAX_INFIDELITY_N:
        raise CodeSizeError(f"n = {qcode.n} exceeds exact-enumeration limit {MAX_INFIDELITY_N}")
    p = qcode.projector()
    fe = 0.0
    for record in itertools.product((0, 1), repeat=qcode.n):
        if sum(record) > qcode.t:
            continue
        k = record_kraus(gamma, record)
        for r in build_recovery(qcode, gamma, record).kraus:
            fe += abs(np.trace(r @ k @ p)) ** 2
    return max(0.0, 1.0 - fe / qcode.K ** 2)
