"""Amplitude damping, the detected-jump channel, and the classical channel it simulates.

The classical channel has inputs {0, 1} (the Hadamard states |+>, |->) and
outputs {0, 1, E}; the erasure symbol E is output index 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quantum import (
    H,
    LabeledKrausChannel,
    X,
    adjoint,
    apply_channel_labeled_operator,
    ket,
    partial_trace,
    projector,
)

ERASURE = 2
OUTPUT_LABELS = ("0", "1", "E")


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    return gamma


@dataclass(frozen=True)
class DiscreteChannel:
    """Row-stochastic transition matrix P(y|x)."""

    transition: np.ndarray

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.ndim != 2:
            raise ValueError("transition matrix must be 2-D")
        if np.any(t < 0):
            raise ValueError("transition probabilities must be non-negative")
        if np.max(np.abs(t.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("transition matrix rows must sum to 1")
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)

    @property
    def inputs(self) -> int:
        return self.transition.shape[0]

    @property
    def outputs(self) -> int:
        return self.transition.shape[1]


def erasure_probability(gamma: float) -> float:
    return _check_gamma(gamma) / 2.0


def flip_probability(gamma: float) -> float:
    gamma = _check_gamma(gamma)
    return ((1.0 - np.sqrt(1.0 - gamma)) / 2.0) ** 2


def build_ad(gamma: float) -> LabeledKrausChannel:
    """Amplitude damping; both branches share record 0 (no detection)."""
    gamma = _check_gamma(gamma)
    a0 = np.diag([1.0, np.sqrt(1.0 - gamma)])
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return LabeledKrausChannel.from_kraus([a0, a1], records=[0, 0], n_records=1)


def build_dj(gamma: float) -> LabeledKrausChannel:
    gamma = _check_gamma(gamma)
    ad = build_ad(gamma)
    return LabeledKrausChannel.from_kraus(ad.kraus, records=[0, 1], n_records=2)


def build_dj_primed(gamma: float) -> LabeledKrausChannel:
    """Detected-jump channel after a CNOT from the record onto the system."""
    gamma = _check_gamma(gamma)
    a0 = np.diag([1.0, np.sqrt(1.0 - gamma)])
    a1 = np.diag([0.0, np.sqrt(gamma)])
    return LabeledKrausChannel.from_kraus([a0, a1], records=[0, 1], n_records=2)


def record_cnot(n_records: int = 2) -> np.ndarray:
    """CNOT on system (x) record with the record as control, system as target."""
    return sum(np.kron(np.linalg.matrix_power(X, r), projector(ket(r, n_records)))
               for r in range(n_records))


def complementary(ch: LabeledKrausChannel) -> Callable[[np.ndarray], np.ndarray]:
    """Map rho to diag(Tr(K_r rho K_r^dagger)) over record symbols r."""

    def apply(rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        weights = np.zeros(ch.n_records, dtype=complex)
        for k, r in zip(ch.kraus, ch.records):
            weights[r] += np.trace(k @ rho @ adjoint(k))
        return np.diag(weights)

    return apply


def verify_degradable(gamma: float, sample_count: int = 0,
                      rng: np.random.Generator | None = None) -> tuple[bool, float]:
    """Check that tracing the system out of the detected-jump output gives the complement.

    Every matrix unit |i><j| is tested; by linearity that settles the identity
    for all inputs. ``sample_count`` random density matrices are checked on top.
    """
    ch = build_dj(gamma)
    comp = complementary(ch)
    inputs = [np.outer(ket(i, 2), ket(j, 2)) for i in range(2) for j in range(2)]
    if sample_count:
        rng = rng if rng is not None else np.random.default_rng(0)
        for _ in range(sample_count):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            rho = g @ adjoint(g)
            inputs.append(rho / np.trace(rho))
    worst = 0.0
    for op in inputs:
        degraded = partial_trace(apply_channel_labeled_operator(ch, op), [2, ch.n_records], keep=[1])
        worst = max(worst, float(np.max(np.abs(degraded - comp(op)))))
    return worst < 1e-10, worst


def extract_xi(gamma: float) -> DiscreteChannel:
    p_e = erasure_probability(gamma)
    p_f = flip_probability(gamma)
    p_s = 1.0 - p_e - p_f
    return DiscreteChannel(np.array([[p_s, p_f, p_e], [p_f, p_s, p_e]]))


_HADAMARD_STATES = (H[:, 0], H[:, 1])


def xi_branch_tables(gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities for the two sampling stages of one channel use.

    Returns ``(p_jump, p_flip)``, each indexed by input bit: the probability
    that the record reads 1, and the probability that a Hadamard-basis
    measurement of the normalized no-jump output gives the other bit.
    """
    ch = build_dj_primed(gamma)
    a0, a1 = ch.kraus
    p_jump = np.empty(2)
    p_flip = np.empty(2)
    for b, psi in enumerate(_HADAMARD_STATES):
        p_jump[b] = np.linalg.norm(a1 @ psi) ** 2
        post = a0 @ psi
        norm2 = np.linalg.norm(post) ** 2
        if norm2 == 0.0:
            p_flip[b] = 0.0
            continue
        other = _HADAMARD_STATES[1 - b]
        p_flip[b] = abs(other.conj() @ post) ** 2 / norm2
    return p_jump, p_flip


def sample_xi_quantum_batch(gamma: float, bits: np.ndarray, u_branch: np.ndarray,
                            u_measure: np.ndarray) -> np.ndarray:
    """Vectorized two-stage sampling driven by supplied uniforms in [0, 1)."""
    p_jump, p_flip = xi_branch_tables(gamma)
    bits = np.asarray(bits, dtype=np.int8)
    jumped = u_branch < p_jump[bits]
    flipped = u_measure < p_flip[bits]
    out = np.where(flipped, 1 - bits, bits).astype(np.int8)
    out[jumped] = ERASURE
    return out


def sample_xi_quantum(gamma: float, bit: int, rng: np.random.Generator) -> int:
    """Send |+> (bit 0) or |-> (bit 1) through the primed channel and measure.

    The Kraus branch is drawn with Born probabilities; record 1 yields E.
    Otherwise the post-branch state is measured in the Hadamard basis.
    """
    ch = build_dj_primed(gamma)
    psi = _HADAMARD_STATES[bit]
    probs = np.array([np.linalg.norm(k @ psi) ** 2 for k in ch.kraus])
    branch = rng.choice(len(ch.kraus), p=probs / probs.sum())
    if ch.records[branch] == 1:
        return ERASURE
    post = ch.kraus[branch] @ psi
    post = post / np.linalg.norm(post)
    outcome = np.array([abs(s.conj() @ post) ** 2 for s in _HADAMARD_STATES])
    return int(rng.choice(2, p=outcome / outcome.sum()))


def sample_xi_closed_form_batch(gamma: float, bits: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling from the transition matrix of ``extract_xi``."""
    cdf = np.cumsum(extract_xi(gamma).transition, axis=1)
    bits = np.asarray(bits, dtype=np.int8)
    out = (u[..., None] >= cdf[bits][..., :-1]).sum(axis=-1).astype(np.int8)
    return out
