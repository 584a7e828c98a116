"""End-to-end acceptance checks, one test per criterion, each at its stated tolerance."""

import subprocess
import sys

import numpy as np
from scipy.optimize import minimize

from djcodes.capacity import (
    blahut_arimoto,
    classical_capacity_xi,
    coherent_info,
    dj_coherent_info_scalar,
    quantum_capacity_dj,
    quantum_capacity_general,
    sweep_curves,
)
from djcodes.channels import build_dj, extract_xi
from djcodes.codes import parse_code
from djcodes.harness import (
    TrialPlan,
    exact_failure_probability,
    run_channel_check,
    run_classical_sim,
)
from djcodes.jumpcodes import entanglement_infidelity, kraus_expansion_check, lift, verify_kl

# Max of Q - C over gamma <= 0.1, from a separate 10^4 x 10^4 brute-force
# evaluation of both closed forms (0.0061382), rounded up.
SMALL_GAMMA_GAP = 0.00614

# Calibrated on n=1024 rate-1/2 (3,6) Gallager codes: C_Xi = 0.7 at 0.40639,
# C_Xi = 0.45 at 0.64934.
LDPC_GAMMA_GOOD = 0.4064
LDPC_GAMMA_BAD = 0.6493


def poisson_slope(gammas, failures, trials):
    """Maximum-likelihood b in failures ~ Poisson(trials * exp(a) * gamma^b)."""
    x = np.log(gammas)
    k = np.asarray(failures, float)

    def nll(theta):
        mu = trials * np.exp(theta[0] + theta[1] * x)
        return np.sum(mu - k * np.log(mu))

    start = np.polyfit(x, np.log(np.maximum(k, 0.5) / trials), 1)[::-1]
    return minimize(nll, start, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-10}).x[1]


def test_c01_capacity_endpoints(criterion):
    vals = [quantum_capacity_dj(0.0).value, quantum_capacity_dj(1.0).value,
            classical_capacity_xi(0.0), classical_capacity_xi(1.0)]
    err = max(abs(v - e) for v, e in zip(vals, (1, 0, 1, 0)))
    criterion(err < 1e-9, f"max endpoint error {err:.2e} (tol 1e-9)")


def test_c02_formula_consistency(criterion):
    worst = 0.0
    for g in np.linspace(0, 1, 21):
        ch = build_dj(g)
        for x in np.linspace(0, 1, 21):
            rho = np.diag([1 - x, x]).astype(complex)
            worst = max(worst, abs(dj_coherent_info_scalar(g, x) - coherent_info(ch, rho)))
    criterion(worst < 1e-10, f"max |scalar - matrix| {worst:.2e} on 21x21 grid (tol 1e-10)")


def test_c03_oracle_equivalence(criterion):
    gammas = np.round(np.arange(0.05, 0.951, 0.05), 2)
    c_err = max(abs(classical_capacity_xi(g) - blahut_arimoto(extract_xi(g), 1e-8)[0]) for g in gammas)
    q_err = max(abs(quantum_capacity_dj(g).value - quantum_capacity_general(g).value) for g in gammas)
    criterion(max(c_err, q_err) < 1e-6,
              f"classical vs BA {c_err:.2e}, scalar vs general {q_err:.2e} (tol 1e-6)")


def test_c04_capacity_curves(criterion):
    q, c = sweep_curves(0.0, 1.0, 101)
    ordered = bool(np.all(c.values <= q.values))
    monotone = bool(np.all(np.diff(q.values) <= 0) and np.all(np.diff(c.values) <= 0))
    small = q.gammas <= 0.1 + 1e-12
    gap = float(np.max(q.values[small] - c.values[small]))
    criterion(ordered and monotone and gap < SMALL_GAMMA_GAP,
              f"C<=Q {ordered}, monotone {monotone}, max gap on [0,0.1] {gap:.7f} "
              f"(threshold {SMALL_GAMMA_GAP})")


def test_c05_channel_statistics(criterion):
    sigmas, bad = [], 0
    for g in (0.1, 0.3, 0.7):
        rep = run_channel_check(TrialPlan(2024, 1_000_000, g, mode="channel-check"))
        bad += rep.failures
        sigmas.append(rep.details["max_sigma"])
    criterion(bad == 0, f"cells outside 5 sigma: {bad}; max deviations "
                        + ", ".join(f"{s:.2f}" for s in sigmas))


def test_c06_classical_scaling(criterion):
    gammas = np.geomspace(0.05, 0.5, 5)
    trials = 1_000_000
    slopes, inside = {}, True
    for n in (3, 5):
        fails = []
        for i, g in enumerate(gammas):
            rep = run_classical_sim(TrialPlan(600 + 10 * n + i, trials, float(g), f"rep{n}"))
            fails.append(rep.failures)
            if n == 3:
                lo, hi = rep.wilson_95_interval
                inside &= lo <= exact_failure_probability(parse_code("rep3"), float(g)) <= hi
        slopes[n] = poisson_slope(gammas, fails, trials)
    ok = abs(slopes[3] - 3) <= 0.3 and abs(slopes[5] - 5) <= 0.5 and inside
    criterion(ok, f"rep3 slope {slopes[3]:.3f} (3 +- 0.3), rep5 slope {slopes[5]:.3f} (5 +- 0.5), "
                  f"rep3 exact within Wilson {inside}")


def test_c07_quantum_conditions(criterion):
    viol = {name: verify_kl(lift(parse_code(name)), 1e-10) for name in ("rep3", "rep5", "hamming74")}
    control = verify_kl(lift(parse_code("parity(4)"), t=2), 1e-10)
    gammas = np.array([0.01, 0.02, 0.04])
    q = lift(parse_code("rep3"))
    slope = np.polyfit(np.log(gammas), np.log([entanglement_infidelity(q, g) for g in gammas]), 1)[0]
    ok = (all(r.passed for r in viol.values()) and not control.passed
          and control.max_violation > 0.1 and abs(slope - 3) <= 0.3)
    criterion(ok, ", ".join(f"{k} {v.max_violation:.1e}" for k, v in viol.items())
              + f"; parity(4) t=2 violation {control.max_violation:.2f}; infidelity slope {slope:.3f}")


def test_c08_kraus_expansion(criterion):
    rows = {g: kraus_expansion_check(g) for g in (0.01, 0.1, 0.5)}
    first = max(f for f, _ in rows.values())
    ok = first < 1e-14 and all(s <= g**2 / 8 for g, (_, s) in rows.items())
    criterion(ok, f"first deviation {first:.1e}; second deviation vs g^2/8: "
              + ", ".join(f"{g}: {s:.4e}/{g**2 / 8:.4e}" for g, (_, s) in rows.items()))


def test_c09_decoder_guarantee(criterion):
    import itertools

    from djcodes.channels import ERASURE
    from djcodes.codes import decode_erasure_flip_batch, unpack_bits

    failures, checked = 0, 0
    for name in ("rep3", "parity(4)", "hamming74"):
        code = parse_code(name)
        rs, cs = [], []
        for c in unpack_bits(code.codeword_table, code.n):
            for e in range(code.d):
                for erased in itertools.combinations(range(code.n), e):
                    rest = [i for i in range(code.n) if i not in erased]
                    for f in range((code.d - 1 - e) // 2 + 1):
                        for flipped in itertools.combinations(rest, f):
                            r = c.astype(np.int8).copy()
                            r[list(flipped)] ^= 1
                            r[list(erased)] = ERASURE
                            rs.append(r)
                            cs.append(c)
        ok, decoded = decode_erasure_flip_batch(code, np.array(rs))
        failures += int(np.sum(~ok | np.any(decoded != np.array(cs), axis=1)))
        checked += len(rs)
    criterion(failures == 0, f"{failures} failures over {checked} received words")


def test_c10_ldpc_waterfall(criterion):
    code = "random_ldpc(1024,6,3,11)"
    good = run_classical_sim(TrialPlan(11, 10_000, LDPC_GAMMA_GOOD, code, decoder="bp"))
    bad = run_classical_sim(TrialPlan(12, 1_000, LDPC_GAMMA_BAD, code, decoder="bp"))
    floor = max(good.failure_rate, 1 / good.plan.trials)
    ok = good.failure_rate < 1e-2 and bad.failure_rate >= 10 * floor
    criterion(ok, f"C={classical_capacity_xi(LDPC_GAMMA_GOOD):.3f}: FER {good.failure_rate:.1e} "
                  f"({good.failures}/{good.plan.trials}); C={classical_capacity_xi(LDPC_GAMMA_BAD):.3f}: "
                  f"FER {bad.failure_rate:.2f}")


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "djcodes", *args], capture_output=True, check=True)
    return proc.stdout


def test_c11_determinism(criterion):
    classical = ["simulate", "classical", "--code", "hamming74", "--gamma", "0.2",
                 "--trials", "50000", "--seed", "99"]
    bp = ["simulate", "classical", "--code", "random_ldpc(240,6,3,2)", "--gamma", "0.3",
          "--trials", "2000", "--seed", "5", "--decoder", "bp"]
    quantum = ["simulate", "quantum", "--code", "hamming74", "--gamma", "0.1"]
    identical = []
    for base in (classical, bp):
        outs = {_cli(*base, "--workers", w) for w in ("1", "1", "1", "4", "4")}
        identical.append(len(outs) == 1)
    identical.append(len({_cli(*quantum) for _ in range(3)}) == 1)
    criterion(all(identical), f"byte-identical reports (exhaustive, bp, quantum): {identical}")
