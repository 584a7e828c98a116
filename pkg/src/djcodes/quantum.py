"""Dense linear algebra for few-qubit states and Kraus channels.

Operators are plain complex ``numpy`` arrays. Multi-qubit basis states are
indexed with qubit 0 as the most significant bit, so ``tensor(a, b)`` puts
``a`` on the leading subsystem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-12
EIG_CLAMP = 1e-14
MAX_DIM = 2**12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class DimensionError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product, leftmost factor most significant."""
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array.

    Raises ``InvalidStateError`` if it is not square, not Hermitian within
    1e-12, not unit trace within 1e-12, or has an eigenvalue below -1e-10.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if rho.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {rho.shape[0]} exceeds supported maximum {MAX_DIM}")
    if np.max(np.abs(rho - adjoint(rho))) > HERMITIAN_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {np.trace(rho).real:.3e} is not 1")
    if np.linalg.eigvalsh((rho + adjoint(rho)) / 2).min() < -PSD_TOL:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho


@dataclass(frozen=True)
class LabeledKrausChannel:
    """A channel given by Kraus operators, each tagged with a record symbol.

    Branches sharing a record symbol are indistinguishable to the receiver;
    distinct symbols are written orthogonally into a classical register of
    size ``n_records``.
    """

    kraus: tuple[np.ndarray, ...]
    records: tuple[int, ...]
    n_records: int

    def __post_init__(self):
        if len(self.kraus) != len(self.records) or not self.kraus:
            raise ValueError("need one record symbol per Kraus operator")
        shapes = {k.shape for k in self.kraus}
        if len(shapes) != 1:
            raise DimensionError(f"Kraus operators have mismatched shapes {shapes}")
        for r in self.records:
            if not 0 <= r < self.n_records:
                raise ValueError(f"record symbol {r} outside alphabet of size {self.n_records}")
        for k in self.kraus:
            k.setflags(write=False)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], records: Sequence[int] | None = None,
                   n_records: int | None = None) -> "LabeledKrausChannel":
        ks = tuple(np.array(k, dtype=complex) for k in kraus)
        recs = tuple(int(r) for r in records) if records is not None else (0,) * len(ks)
        if n_records is None:
            n_records = max(recs) + 1
        return cls(ks, recs, n_records)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(adjoint(k) @ k for k in self.kraus)
        return float(np.max(np.abs(total - np.eye(self.input_dim))))


def identity_channel(dim: int = 2) -> LabeledKrausChannel:
    return LabeledKrausChannel.from_kraus([np.eye(dim)])


def _check_input(ch: LabeledKrausChannel, op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (ch.input_dim, ch.input_dim):
        raise DimensionError(f"operator shape {op.shape} incompatible with channel input dim {ch.input_dim}")
    return op


def apply_channel_operator(ch: LabeledKrausChannel, op: np.ndarray) -> np.ndarray:
    """Linear action sum_i K_i op K_i^dagger on an arbitrary operator."""
    op = _check_input(ch, op)
    return sum(k @ op @ adjoint(k) for k in ch.kraus)


def apply_channel(ch: LabeledKrausChannel, rho: np.ndarray) -> np.ndarray:
    rho = check_density_matrix(rho)
    return apply_channel_operator(ch, rho)


def apply_channel_labeled_operator(ch: LabeledKrausChannel, op: np.ndarray) -> np.ndarray:
    op = _check_input(ch, op)
    d_out, n_rec = ch.output_dim, ch.n_records
    out = np.zeros((d_out * n_rec, d_out * n_rec), dtype=complex)
    for k, r in zip(ch.kraus, ch.records):
        out += np.kron(k @ op @ adjoint(k), projector(ket(r, n_rec)))
    return out


def apply_channel_labeled(ch: LabeledKrausChannel, rho: np.ndarray) -> np.ndarray:
    """Output on system (x) record register, one diagonal block per record."""
    rho = check_density_matrix(rho)
    return apply_channel_labeled_operator(ch, rho)


def complementary_operator(ch: LabeledKrausChannel, op: np.ndarray) -> np.ndarray:
    """Environment output of the Stinespring dilation that keeps the record.

    Entry (i, j) is Tr(K_i op K_j^dagger) when branches i and j carry the same
    record and 0 otherwise, since the record register already separates them.
    """
    op = _check_input(ch, op)
    m = len(ch.kraus)
    out = np.zeros((m, m), dtype=complex)
    for i, (ki, ri) in enumerate(zip(ch.kraus, ch.records)):
        for j, (kj, rj) in enumerate(zip(ch.kraus, ch.records)):
            if ri == rj:
                out[i, j] = np.trace(ki @ op @ adjoint(kj))
    return out


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce ``rho`` on subsystems ``dims`` to the subsystems listed in ``keep``."""
    rho = np.asarray(rho, dtype=complex)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"dims {dims} do not match operator shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum subscripts: row axes 0..n-1, column axes n..2n-1, traced pairs share a label
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in traced:
        cols[i] = rows[i]
    out_sub = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out_sub, t)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(d_keep, d_keep)


def hermitian_eigenvalues(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.linalg.eigvalsh((m + adjoint(m)) / 2)


def _entropy_of(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; eigenvalues below 1e-14 count as zero."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - adjoint(rho))) > HERMITIAN_TOL:
        raise InvalidStateError("entropy requires a Hermitian operator")
    lam = hermitian_eigenvalues(rho)
    if lam.min() < -PSD_TOL:
        raise InvalidStateError("entropy requires a positive semidefinite operator")
    lam = np.where(lam < EIG_CLAMP, 0.0, lam)
    return _entropy_of(lam)


def shannon_entropy(p: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return _entropy_of(p)


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def bloch_state(r: Sequence[float]) -> np.ndarray:
    rx, ry, rz = r
    return 0.5 * (I2 + rx * X + ry * Y + rz * Z)


def fidelity_pure(psi: np.ndarray, rho: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ rho @ psi))
