"""Monte Carlo experiments and report/curve emission.

Randomness is counter based: trials are grouped into fixed blocks of
``BLOCK_TRIALS`` and block ``b`` draws from a Philox stream keyed by
``(seed, b)``. Results therefore do not depend on how blocks are spread over
worker processes.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.stats import binomtest

from .capacity import CapacityCurve
from .channels import (
    OUTPUT_LABELS,
    extract_xi,
    sample_xi_closed_form_batch,
    sample_xi_quantum_batch,
)
from .codes import BinaryLinearCode, CodeError, decode_erasure_flip_batch, encode, parse_code
from .jumpcodes import MAX_INFIDELITY_N, CodeSizeError, entanglement_infidelity, lift
from .ldpc import TannerGraph, bp_decode_xi_batch

BLOCK_TRIALS = 4096
BP_CHUNK = 256
MODES = ("classical", "quantum", "channel-check")
DECODERS = ("exhaustive", "bp")
SAMPLERS = ("quantum", "closed-form")
SIGMA_BOUND = 5.0


@dataclass(frozen=True)
class TrialPlan:
    seed: int
    trials: int
    gamma: float
    code: str = ""
    mode: str = "classical"
    decoder: str = "exhaustive"
    sampler: str = "quantum"
    max_iters: int = 50

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SimulationReport:
    plan: TrialPlan
    failures: float
    failure_rate: float
    wilson_95_interval: tuple[float, float]
    wall_time_seconds: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["wilson_95_interval"] = list(self.wilson_95_interval)
        if not self.details:
            del out["details"]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def wilson_interval(failures: int, trials: int) -> tuple[float, float]:
    ci = binomtest(int(failures), int(trials)).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS))
            for b in range(math.ceil(trials / BLOCK_TRIALS))]


def _map_blocks(fn, args: Iterable[tuple], workers: int) -> list:
    args = list(args)
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args)))


@lru_cache(maxsize=16)
def _resolve(descriptor: str) -> BinaryLinearCode:
    return parse_code(descriptor)


@lru_cache(maxsize=16)
def _graph(descriptor: str) -> TannerGraph:
    return TannerGraph(_resolve(descriptor).parity_check)


def sample_channel(gamma: float, bits: np.ndarray, rng: np.random.Generator,
                   sampler: str = "quantum") -> np.ndarray:
    """One use of the simulated classical channel per entry of ``bits``."""
    if sampler == "quantum":
        u = rng.random(bits.shape + (2,))
        return sample_xi_quantum_batch(gamma, bits, u[..., 0], u[..., 1])
    return sample_xi_closed_form_batch(gamma, bits, rng.random(bits.shape))


def _classical_block(plan: TrialPlan, block: int, size: int) -> int:
    code = _resolve(plan.code)
    rng = block_rng(plan.seed, block)
    msg = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
    sent = encode(code, msg)
    received = sample_channel(plan.gamma, sent, rng, plan.sampler)
    if plan.decoder == "exhaustive":
        ok, decoded = decode_erasure_flip_batch(code, received)
        return int(np.sum(~ok | np.any(decoded != sent, axis=1)))
    failures = 0
    graph = _graph(plan.code)
    for s in range(0, size, BP_CHUNK):
        hard, ok, _ = bp_decode_xi_batch(code, received[s:s + BP_CHUNK], plan.gamma,
                                         plan.max_iters, graph=graph)
        failures += int(np.sum(~ok | np.any(hard != sent[s:s + BP_CHUNK], axis=1)))
    return failures


def _report(plan: TrialPlan, failures: int, started: float, timing: bool, **details) -> SimulationReport:
    elapsed = time.perf_counter() - started if timing else None
    return SimulationReport(plan, failures, failures / plan.trials,
                            wilson_interval(failures, plan.trials), elapsed, details)


def run_classical_sim(plan: TrialPlan, workers: int = 1, timing: bool = False) -> SimulationReport:
    """Encode random messages, pass them through the channel, decode, count frame errors."""
    if plan.mode != "classical":
        raise ValueError("plan mode must be 'classical'")
    started = time.perf_counter()
    code = _resolve(plan.code)
    if plan.decoder == "bp":
        _graph(plan.code)
    counts = _map_blocks(_classical_block, ((plan, b, s) for b, s in _blocks(plan.trials)), workers)
    return _report(plan, sum(counts), started, timing, n=code.n, k=code.k)


def run_quantum_sim(plan: TrialPlan, timing: bool = False) -> SimulationReport:
    """Exact entanglement infidelity of the lifted code, reported as a one-trial failure rate."""
    if plan.mode != "quantum":
        raise ValueError("plan mode must be 'quantum'")
    started = time.perf_counter()
    code = _resolve(plan.code)
    if code.n > MAX_INFIDELITY_N:
        raise CodeSizeError(f"n = {code.n} exceeds exact-enumeration limit {MAX_INFIDELITY_N}")
    qcode = lift(code)
    value = entanglement_infidelity(qcode, plan.gamma)
    exact = TrialPlan(plan.seed, 1, plan.gamma, plan.code, "quantum", plan.decoder, plan.sampler)
    elapsed = time.perf_counter() - started if timing else None
    return SimulationReport(exact, value, value, (value, value), elapsed,
                            {"n": code.n, "K": qcode.K, "t": qcode.t})


def _channel_block(gamma: float, seed: int, block: int, size: int) -> np.ndarray:
    rng = block_rng(seed, block)
    counts = np.zeros((2, 3), dtype=np.int64)
    for bit in (0, 1):
        out = sample_channel(gamma, np.full(size, bit, dtype=np.int8), rng, "quantum")
        counts[bit] = np.bincount(out, minlength=3)
    return counts


def channel_deviations(counts: np.ndarray, gamma: float) -> np.ndarray:
    """Per-cell |empirical - expected| in binomial standard deviations (inf if impossible)."""
    expected = extract_xi(gamma).transition
    n = counts.sum(axis=1, keepdims=True)
    freq = counts / n
    sigma = np.sqrt(expected * (1 - expected) / n)
    diff = np.abs(freq - expected)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, diff / np.where(sigma > 0, sigma, 1.0), np.where(diff > 0, np.inf, 0.0))
    return z


def run_channel_check(plan: TrialPlan, workers: int = 1, timing: bool = False) -> SimulationReport:
    """Sample ``plan.trials`` uses per input bit and compare with the closed-form matrix.

    ``failures`` counts matrix cells outside the 5-sigma binomial band.
    """
    if plan.mode != "channel-check":
        raise ValueError("plan mode must be 'channel-check'")
    started = time.perf_counter()
    parts = _map_blocks(_channel_block, ((plan.gamma, plan.seed, b, s) for b, s in _blocks(plan.trials)),
                        workers)
    counts = np.sum(parts, axis=0)
    z = channel_deviations(counts, plan.gamma)
    bad = int(np.sum(z > SIGMA_BOUND))
    return _report(plan, bad, started, timing,
                   outputs=list(OUTPUT_LABELS),
                   counts=counts.tolist(),
                   empirical=(counts / plan.trials).tolist(),
                   expected=extract_xi(plan.gamma).transition.tolist(),
                   max_sigma=float(z.max()))


def exact_failure_probability(code: BinaryLinearCode, gamma: float) -> float:
    """Frame error probability of the exhaustive decoder, summed over all 3^n channel outputs.

    The channel and decoder are symmetric under adding a codeword, so sending
    the all-zero word suffices.
    """
    if code.n > 12:
        raise CodeError("exact enumeration limited to n <= 12")
    w = extract_xi(gamma).transition[0]
    outputs = np.array(list(itertools.product(range(3), repeat=code.n)), dtype=np.int8)
    probs = np.prod(w[outputs], axis=1)
    ok, decoded = decode_erasure_flip_batch(code, outputs)
    wrong = ~ok | decoded.any(axis=1)
    return float(probs[wrong].sum())


# --- emission -----------------------------------------------------------------

CSV_HEADER = ("gamma", "q_capacity", "c_capacity")
SIG_DIGITS = 12


def format_sig(value: float, digits: int = SIG_DIGITS) -> str:
    """Positional notation with ``digits`` significant digits; zero keeps ``digits`` decimals."""
    if value == 0.0:
        return "0." + "0" * digits
    exponent = int(f"{value:.{digits - 1}e}".split("e")[1])
    return f"{value:.{max(digits - 1 - exponent, 0)}f}"


def emit_curves(curves: tuple[CapacityCurve, CapacityCurve], path) -> None:
    q, c = curves
    if not np.array_equal(q.gammas, c.gammas):
        raise ValueError("curves must share a gamma grid")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for g, qv, cv in zip(q.gammas, q.values, c.values):
            writer.writerow([format_sig(g), format_sig(qv), format_sig(cv)])


def read_curves(path) -> tuple[CapacityCurve, CapacityCurve]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return (CapacityCurve("q_capacity", data[:, 0], data[:, 1]),
            CapacityCurve("c_capacity", data[:, 0], data[:, 2]))


def emit_report(report: SimulationReport, path) -> None:
    Path(path).write_text(report.to_json())
