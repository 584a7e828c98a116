"""Quantum capacity of the detected-jump channel and classical capacity of its simulated channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .channels import DiscreteChannel, _check_gamma, build_dj, erasure_probability, flip_probability
from .quantum import (
    LabeledKrausChannel,
    apply_channel_labeled,
    bloch_state,
    check_density_matrix,
    complementary_operator,
    shannon_entropy,
    von_neumann_entropy,
)

LN2 = np.log(2.0)
GRID_POINTS = 1001
REFINE_TOL = 1e-9
_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CoherentInfoResult:
    value: float
    argmax_x: float
    argmax_state: np.ndarray


@dataclass(frozen=True)
class CapacityCurve:
    label: str
    gammas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.gammas) <= 0):
            raise ValueError("curve gammas must be strictly increasing")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValueError("capacity values must lie in [0, 1]")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.gammas.tolist(), self.values.tolist()))


def coherent_info(ch: LabeledKrausChannel, rho: np.ndarray) -> float:
    """S(channel output including record) - S(complementary output), in bits."""
    rho = check_density_matrix(rho)
    out = apply_channel_labeled(ch, rho)
    env = complementary_operator(ch, rho)
    return von_neumann_entropy(out) - von_neumann_entropy(env)


def dj_coherent_info_scalar(gamma, x):
    """Coherent information of the detected-jump channel at input diag(1-x, x).

    Accepts scalars or broadcastable arrays.
    """
    gamma = np.asarray(gamma, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any((gamma < 0) | (gamma > 1)) or np.any((x < 0) | (x > 1)):
        raise ValueError("gamma and x must lie in [0, 1]")
    a = 1.0 - gamma * x
    b = 1.0 - x
    c = (1.0 - gamma) * x
    val = (xlogy(a, a) - xlogy(b, b) - xlogy(c, c)) / LN2
    return float(val) if val.ndim == 0 else val


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def quantum_capacity_dj(gamma: float) -> CoherentInfoResult:
    """Maximize the scalar coherent information over x on a grid, then refine."""
    gamma = _check_gamma(gamma)
    xs = np.linspace(0.0, 1.0, GRID_POINTS)
    vals = dj_coherent_info_scalar(gamma, xs)
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, GRID_POINTS - 1)]
    x = _golden_max(lambda t: dj_coherent_info_scalar(gamma, t), lo, hi, REFINE_TOL)
    candidates = [(dj_coherent_info_scalar(gamma, x), x), (float(vals[i]), float(xs[i]))]
    value, x = max(candidates)
    return CoherentInfoResult(value, x, np.diag([1.0 - x, x]).astype(complex))


def _ball(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt(1.0 + v @ v)


def quantum_capacity_general(gamma: float, starts: int = 24, seed: int = 0) -> CoherentInfoResult:
    """Maximize coherent information over all single-qubit inputs.

    The Bloch ball is reached through r = v / sqrt(1 + |v|^2) so the search is
    unconstrained; each start runs a quasi-Newton search with finite-difference
    gradients.
    """
    gamma = _check_gamma(gamma)
    ch = build_dj(gamma)

    def neg(v):
        return -coherent_info(ch, bloch_state(_ball(v)))

    rng = np.random.default_rng(seed)
    seeds = [np.zeros(3), np.array([0.0, 0.0, 0.5]), np.array([0.0, 0.0, -0.5])]
    seeds += [rng.normal(scale=1.5, size=3) for _ in range(starts - len(seeds))]
    best = None
    for v0 in seeds:
        res = minimize(neg, v0, method="BFGS", options={"gtol": 1e-10, "xrtol": 1e-8})
        if best is None or res.fun < best.fun:
            best = res
    rho = bloch_state(_ball(best.x))
    return CoherentInfoResult(-float(best.fun), float(np.real(rho[1, 1])), rho)


def classical_capacity_xi(gamma: float) -> float:
    p_e = erasure_probability(gamma)
    p_f = flip_probability(gamma)
    h_out = shannon_entropy([p_e, (1 - p_e) / 2, (1 - p_e) / 2])
    h_noise = shannon_entropy([p_e, p_f, max(1 - p_e - p_f, 0.0)])
    return h_out - h_noise


def _kl_rows(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    # D(W(.|x) || q) in nats per input x; q > 0 wherever W > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / np.where(q > 0, q, 1.0), 1.0)
    return np.sum(xlogy(w, ratio), axis=1)


def blahut_arimoto(ch: DiscreteChannel | np.ndarray, tol: float = 1e-9,
                   max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    """Capacity in bits and an optimal input distribution.

    Iterates until max_x D(W(.|x)||q) - I(p) < tol, which bounds the distance
    to the true capacity from both sides.
    """
    if not isinstance(ch, DiscreteChannel):
        ch = DiscreteChannel(np.asarray(ch, dtype=float))
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = ch.transition
    p = np.full(ch.inputs, 1.0 / ch.inputs)
    for _ in range(max_iter):
        q = p @ w
        d = _kl_rows(w, q)
        lower = float(p @ d)
        upper = float(d.max())
        if (upper - lower) / LN2 < tol:
            break
        p = p * np.exp(d - d.max())
        p /= p.sum()
    else:
        raise RuntimeError("Blahut-Arimoto did not converge")
    return lower / LN2, p


def capacity_bitflip_example(p: float) -> float:
    """Quantum capacity of the Pauli-X flip channel with probability p: 1 - H2(p)."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return 1.0 - shannon_entropy([p, 1.0 - p])


def _clip_unit(values: np.ndarray) -> np.ndarray:
    # float round-off near the endpoints only
    if np.any(values < -1e-12) or np.any(values > 1 + 1e-12):
        raise ValueError("capacity outside [0, 1]")
    return np.clip(values, 0.0, 1.0)


def sweep_curves(gamma_min: float, gamma_max: float, steps: int) -> tuple[CapacityCurve, CapacityCurve]:
    if not (0.0 <= gamma_min < gamma_max <= 1.0):
        raise ValueError("need 0 <= gamma_min < gamma_max <= 1")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    gammas = np.linspace(gamma_min, gamma_max, steps)
    q = np.array([quantum_capacity_dj(g).value for g in gammas])
    c = np.array([classical_capacity_xi(g) for g in gammas])
    q_curve = CapacityCurve("q_capacity", gammas, _clip_unit(q))
    c_curve = CapacityCurve("c_capacity", gammas, _clip_unit(c))
    gap = c_curve.values - q_curve.values
    if np.any(gap > 1e-9):
        raise AssertionError(f"classical capacity exceeds quantum capacity by {gap.max():.3e}")
    return q_curve, c_curve
