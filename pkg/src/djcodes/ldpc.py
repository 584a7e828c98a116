"""Regular LDPC codes and decoders for the erasure+flip channel.

LLR convention: positive means bit 0. Erased positions carry LLR 0.
"""

from __future__ import annotations

import math

import numpy as np

from .channels import ERASURE, erasure_probability, flip_probability
from .codes import BinaryLinearCode, CodeError, DecodeResult, _check_received, syndrome

LLR_CLIP = 30.0
_TANH_CLIP = 1.0 - 1e-15


def _four_cycles(band: np.ndarray, previous: np.ndarray) -> int:
    if previous.size == 0:
        return 0
    overlap = band.astype(np.int32) @ previous.T.astype(np.int32)
    return int((overlap * (overlap - 1) // 2).sum())


def _greedy_band(row_sizes: np.ndarray, stacked: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Assign columns to band rows, avoiding pairs that already share a check."""
    n = stacked.shape[1]
    s = stacked.astype(np.float32)
    conflict = (s.T @ s) > 0
    np.fill_diagonal(conflict, False)
    members = np.zeros((len(row_sizes), n), dtype=np.float32)
    free = row_sizes.astype(np.int64).copy()
    for v in rng.permutation(n):
        hits = members @ conflict[v].astype(np.float32)
        open_rows = np.nonzero(free > 0)[0]
        clean = open_rows[hits[open_rows] == 0]
        if clean.size:
            r = rng.choice(clean)
        else:
            r = open_rows[np.argmin(hits[open_rows])]
        members[r, v] = 1
        free[r] -= 1
    return members.astype(np.uint8)


def gallager_matrix(n: int, row_wt: int, col_wt: int, seed: int) -> np.ndarray:
    """Gallager's regular ensemble: ``col_wt`` bands, each splitting the
    columns into rows of weight ``row_wt`` (the last row shorter when
    ``row_wt`` does not divide ``n``). The first band is block diagonal; later
    bands place columns in random order into rows that create no 4-cycle,
    falling back to the least-conflicting row when none is free of them."""
    if row_wt < 2 or col_wt < 1 or n < 2 * row_wt or col_wt >= row_wt:
        raise CodeError(f"infeasible LDPC parameters n={n}, row_wt={row_wt}, col_wt={col_wt}")
    rng = np.random.default_rng(seed)
    rows = -(-n // row_wt)
    base = np.zeros((rows, n), dtype=np.uint8)
    for r in range(rows):
        base[r, r * row_wt:(r + 1) * row_wt] = 1
    sizes = base.sum(axis=1)
    bands = [base]
    for _ in range(1, col_wt):
        bands.append(_greedy_band(sizes, np.concatenate(bands), rng))
    return np.concatenate(bands)


def random_ldpc(n: int, row_wt: int, col_wt: int, seed: int) -> BinaryLinearCode:
    h = gallager_matrix(n, row_wt, col_wt, seed)
    code = BinaryLinearCode.from_parity_check(f"random_ldpc({n},{row_wt},{col_wt},{seed})", h)
    code.meta["design_rate"] = 1.0 - col_wt / row_wt
    return code


def ldpc_for_rate(n: int, rate: float, seed: int, col_wt: int = 3) -> BinaryLinearCode:
    if not 0.0 < rate < 1.0:
        raise CodeError("rate must lie in (0, 1)")
    row_wt = int(round(col_wt / (1.0 - rate)))
    return random_ldpc(n, row_wt, col_wt, seed)


class TannerGraph:
    """Edge lists of a parity-check matrix, grouped by check and by variable."""

    def __init__(self, h: np.ndarray):
        h = np.asarray(h, dtype=np.uint8)
        self.m, self.n = h.shape
        chk, var = np.nonzero(h)  # row-major: sorted by check
        self.chk = chk
        self.var = var
        self.chk_starts = np.searchsorted(chk, np.arange(self.m))
        self.by_var = np.argsort(var, kind="stable")
        self.var_starts = np.searchsorted(var[self.by_var], np.arange(self.n))
        if np.any(np.diff(np.append(self.chk_starts, len(chk))) == 0):
            raise CodeError("parity-check matrix has an empty row")
        if np.any(np.diff(np.append(self.var_starts, len(var))) == 0):
            raise CodeError("parity-check matrix has an empty column")

    def check_sums(self, edge_values: np.ndarray) -> np.ndarray:
        return np.add.reduceat(edge_values, self.chk_starts, axis=1)

    def var_sums(self, edge_values: np.ndarray) -> np.ndarray:
        return np.add.reduceat(edge_values[:, self.by_var], self.var_starts, axis=1)

    def syndrome_ok(self, hard: np.ndarray) -> np.ndarray:
        parity = self.check_sums(hard[:, self.var].astype(np.int32)) & 1
        return ~parity.any(axis=1)


def _check_update(g: TannerGraph, v2c: np.ndarray) -> np.ndarray:
    t = np.tanh(v2c / 2.0)
    zero = t == 0.0
    neg = t < 0.0
    logmag = np.log(np.where(zero, 1.0, np.abs(t)))
    zeros = g.check_sums(zero.astype(np.int32))[:, g.chk] - zero
    negs = g.check_sums(neg.astype(np.int32))[:, g.chk] - neg
    mag = np.exp(g.check_sums(logmag)[:, g.chk] - logmag)
    prod = np.where(negs & 1, -1.0, 1.0) * np.minimum(mag, _TANH_CLIP)
    return np.where(zeros > 0, 0.0, 2.0 * np.arctanh(prod))


def bp_decode_llr(g: TannerGraph, llr: np.ndarray, max_iters: int = 50
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sum-product decoding of a batch of channel LLR vectors.

    Returns ``(hard, ok, iterations)``. A frame stops once its hard decision
    satisfies every check and no posterior LLR is exactly 0.
    """
    llr = np.clip(np.atleast_2d(np.asarray(llr, dtype=float)), -LLR_CLIP, LLR_CLIP)
    frames = llr.shape[0]
    hard = (llr < 0).astype(np.uint8)
    ok = g.syndrome_ok(hard) & ~(llr == 0).any(axis=1)
    iters = np.zeros(frames, dtype=np.int64)
    active = np.nonzero(~ok)[0]
    v2c = llr[active][:, g.var]
    for it in range(1, max_iters + 1):
        if active.size == 0:
            break
        c2v = _check_update(g, v2c)
        total = llr[active] + g.var_sums(c2v)
        h = (total < 0).astype(np.uint8)
        done = g.syndrome_ok(h) & ~(total == 0).any(axis=1)
        hard[active] = h
        iters[active] = it
        ok[active[done]] = True
        keep = ~done
        active = active[keep]
        v2c = (total[:, g.var] - c2v)[keep]
    return hard, ok, iters


def xi_llrs(received: np.ndarray, gamma: float, erasure_only: bool = False) -> np.ndarray:
    """Channel LLRs: 0 for E, +/- log((1-p_E-p_F)/p_F) for a received 0/1."""
    p_e = erasure_probability(gamma)
    p_f = 0.0 if erasure_only else flip_probability(gamma)
    if p_f == 0.0:
        mag = LLR_CLIP
    else:
        mag = min(math.log((1.0 - p_e - p_f) / p_f), LLR_CLIP)
    r = np.asarray(received)
    return np.where(r == ERASURE, 0.0, np.where(r == 1, -mag, mag))


def bp_decode_xi_batch(code: BinaryLinearCode, received: np.ndarray, gamma: float,
                       max_iters: int = 50, erasure_only: bool = False,
                       graph: TannerGraph | None = None):
    r = _check_received(code, np.atleast_2d(received))
    g = graph if graph is not None else TannerGraph(code.parity_check)
    return bp_decode_llr(g, xi_llrs(r, gamma, erasure_only), max_iters)


def bp_decode_xi(code: BinaryLinearCode, received, gamma: float, max_iters: int = 50,
                 erasure_only: bool = False) -> DecodeResult:
    r = _check_received(code, received)
    hard, ok, iters = bp_decode_xi_batch(code, r[None, :], gamma, max_iters, erasure_only)
    if not ok[0]:
        return DecodeResult("failure", None, 0, 0, int(iters[0]))
    cw = hard[0]
    erasures = int(np.sum(r == ERASURE))
    flips = int(np.sum((r != ERASURE) & (r != cw)))
    return DecodeResult("decoded", cw, erasures, flips, int(iters[0]))


def peel_decode(code: BinaryLinearCode, received) -> DecodeResult:
    """Peeling decoder for erasures only: repeatedly solve checks with one unknown."""
    r = _check_received(code, received)
    word = np.where(r == ERASURE, 0, r).astype(np.uint8)
    unknown = r == ERASURE
    rows = [np.nonzero(row)[0] for row in code.parity_check]
    progress = True
    while progress and unknown.any():
        progress = False
        for cols in rows:
            u = cols[unknown[cols]]
            if u.size == 1:
                word[u[0]] = word[cols].sum() & 1  # unknown slot currently 0
                unknown[u[0]] = False
                progress = True
    if unknown.any():
        return DecodeResult("failure", None, 0, 0)
    if np.any(syndrome(code, word)):
        return DecodeResult("failure", None, 0, 0)
    return DecodeResult("decoded", word, int((r == ERASURE).sum()), 0)

