"""Command-line entry point.

Exit status: 0 on success, 1 when a checked property fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .capacity import sweep_curves
from .codes import CodeError, parse_code
from .harness import (
    DECODERS,
    SAMPLERS,
    TrialPlan,
    emit_curves,
    run_channel_check,
    run_classical_sim,
    run_quantum_sim,
)
from .jumpcodes import CodeSizeError, lift, verify_kl
from .ldpc import ldpc_for_rate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--timing", action="store_true",
                   help="record wall time in the report (makes output run-dependent)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="djcodes", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    cap = groups.add_parser("capacity").add_subparsers(dest="command", required=True)
    sweep = cap.add_parser("sweep", help="quantum and classical capacity curves as CSV")
    sweep.add_argument("--gamma-min", type=_unit, required=True)
    sweep.add_argument("--gamma-max", type=_unit, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--out", required=True)

    chan = groups.add_parser("channel").add_subparsers(dest="command", required=True)
    check = chan.add_parser("check", help="sample the simulated channel and compare with its closed form")
    check.add_argument("--gamma", type=_unit, required=True)
    check.add_argument("--trials", type=_positive, required=True)
    check.add_argument("--seed", type=_seed, required=True)
    check.add_argument("--workers", type=_positive, default=1)
    _add_output(check)

    code = groups.add_parser("code").add_subparsers(dest="command", required=True)
    kl = code.add_parser("kl-check", help="verify error-correction conditions of a lifted code")
    kl.add_argument("--code", required=True)
    kl.add_argument("--t", type=int, default=None)
    kl.add_argument("--tolerance", type=float, default=1e-10)
    kl.add_argument("--unheralded", action="store_true",
                    help="compare all error pairs, as for undetected amplitude damping")

    sim = groups.add_parser("simulate").add_subparsers(dest="command", required=True)
    classical = sim.add_parser("classical", help="frame error rate of a classical code over the channel")
    classical.add_argument("--code", required=True)
    classical.add_argument("--gamma", type=_unit, required=True)
    classical.add_argument("--trials", type=_positive, required=True)
    classical.add_argument("--seed", type=_seed, required=True)
    classical.add_argument("--decoder", choices=DECODERS, default="exhaustive")
    classical.add_argument("--sampler", choices=SAMPLERS, default="quantum")
    classical.add_argument("--max-iters", type=_positive, default=50)
    classical.add_argument("--workers", type=_positive, default=1)
    _add_output(classical)
    quantum = sim.add_parser("quantum", help="exact entanglement infidelity of a lifted code")
    quantum.add_argument("--code", required=True)
    quantum.add_argument("--gamma", type=_unit, required=True)
    _add_output(quantum)

    ldpc = groups.add_parser("ldpc").add_subparsers(dest="command", required=True)
    demo = ldpc.add_parser("demo", help="regular LDPC code with belief propagation over the channel")
    demo.add_argument("--n", type=_positive, required=True)
    demo.add_argument("--rate", type=float, required=True)
    demo.add_argument("--gamma", type=_unit, required=True)
    demo.add_argument("--trials", type=_positive, required=True)
    demo.add_argument("--seed", type=_seed, required=True)
    demo.add_argument("--max-iters", type=_positive, default=50)
    demo.add_argument("--workers", type=_positive, default=1)
    _add_output(demo)
    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args: argparse.Namespace) -> int:
    cmd = (args.group, args.command)
    if cmd == ("capacity", "sweep"):
        emit_curves(sweep_curves(args.gamma_min, args.gamma_max, args.steps), args.out)
        return EXIT_OK

    if cmd == ("channel", "check"):
        plan = TrialPlan(args.seed, args.trials, args.gamma, mode="channel-check")
        report = run_channel_check(plan, workers=args.workers, timing=args.timing)
        _write(report.to_json(), args.out)
        return EXIT_OK if report.failures == 0 else EXIT_FAIL

    if cmd == ("code", "kl-check"):
        qcode = lift(parse_code(args.code), args.t)
        rep = verify_kl(qcode, args.tolerance, heralded=not args.unheralded)
        summary = {
            "code": args.code,
            "n": qcode.n,
            "K": qcode.K,
            "t": qcode.t,
            "heralded": not args.unheralded,
            "error_patterns": len(rep.patterns),
            "tolerance": args.tolerance,
            "max_violation": rep.max_violation,
            "passed": rep.passed,
            "worst_pair": [str(p) for p in rep.worst_pair] if rep.worst_pair else None,
        }
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
        return EXIT_OK if rep.passed else EXIT_FAIL

    if cmd == ("simulate", "classical"):
        parse_code(args.code)
        plan = TrialPlan(args.seed, args.trials, args.gamma, args.code, "classical",
                         args.decoder, args.sampler, args.max_iters)
        report = run_classical_sim(plan, workers=args.workers, timing=args.timing)
        _write(report.to_json(), args.out)
        return EXIT_OK

    if cmd == ("simulate", "quantum"):
        plan = TrialPlan(0, 1, args.gamma, args.code, "quantum")
        report = run_quantum_sim(plan, timing=args.timing)
        _write(report.to_json(), args.out)
        return EXIT_OK

    if cmd == ("ldpc", "demo"):
        code = ldpc_for_rate(args.n, args.rate, args.seed)
        plan = TrialPlan(args.seed, args.trials, args.gamma, code.name, "classical", "bp",
                         "quantum", args.max_iters)
        report = run_classical_sim(plan, workers=args.workers, timing=args.timing)
        _write(report.to_json(), args.out)
        return EXIT_OK

    raise AssertionError(f"unhandled command {cmd}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (CodeError, CodeSizeError, ValueError) as exc:
        parser.error(str(exc))  # exits with status 2
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
