"""Command-line entry point: ``expertmix {maxent,radius,fuse,simulate,coverage}``.

Exit status is 0 on success, 2 on usage errors and 1 on domain errors
(infeasible constraints, malformed files). Domain errors are reported on
stderr as a one-line JSON object. Every file output is accompanied by a
``<output>.manifest.json`` run manifest.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import io as fio
from .concentration import ConcentrationSpec, DEFAULT_DELTA
from .fusion import fuse
from .maxent import solve_maxent
from .model import ExpertMixError, InfeasibleConstraintsError, empirical_distribution
from .sim import SimulationConfig, run_coverage, run_trajectory, write_trajectory_csv


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _delta(text):
    d = float(text)
    if not (0.0 < d <= 1.0):
        raise argparse.ArgumentTypeError("delta must lie in (0, 1]")
    return d


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expertmix",
        description="Fuse a maximum-entropy expert prior with empirical counts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("maxent", help="build the maximum-entropy prior from constraints")
    p.add_argument("--constraints", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--report", type=Path)

    p = sub.add_parser("radius", help="print a concentration radius")
    p.add_argument("--n", required=True, type=_positive_int)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--delta", type=_delta, default=DEFAULT_DELTA)
    p.add_argument("--divergence", choices=["kl", "l1"], default="kl")
    p.add_argument("--variant", choices=["exact", "conjecture"], default="conjecture")

    p = sub.add_parser("fuse", help="combine a prior and counts into an estimate")
    p.add_argument("--expert", required=True, type=Path)
    p.add_argument("--counts", required=True, type=Path)
    p.add_argument("--n", type=int, help="declared sample size; must equal the counts total")
    p.add_argument("--method", choices=["kl", "l1"], default="kl")
    p.add_argument("--delta", type=_delta, default=DEFAULT_DELTA)
    p.add_argument("--variant", choices=["exact", "conjecture"], default="conjecture")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--report", type=Path)

    p = sub.add_parser("simulate", help="error trajectories versus sample size")
    p.add_argument("--symptoms", type=_positive_int, default=7)
    p.add_argument("--sigma2", type=_float_list, default=(0.1, 0.2, 0.4))
    p.add_argument("--no-exact-prior", action="store_true")
    p.add_argument("--delta", type=_delta, default=DEFAULT_DELTA)
    p.add_argument("--n-max", type=_positive_int, default=2000)
    p.add_argument("--checkpoints", type=_int_list)
    p.add_argument("--reps", type=_positive_int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--variant", choices=["exact", "conjecture"], default="conjecture")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("coverage", help="Monte-Carlo check of the concentration events")
    p.add_argument("--symptoms", type=_positive_int, default=2)
    p.add_argument("--sigma2", type=_float_list, default=(0.1, 0.2, 0.4))
    p.add_argument("--no-exact-prior", action="store_true")
    p.add_argument("--n", type=_positive_int, default=50)
    p.add_argument("--delta", type=_delta, default=0.1)
    p.add_argument("--reps", type=_positive_int, default=2000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--variant", choices=["exact", "conjecture"], default="exact")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _manifest(args, inputs, outputs, started):
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    return {
        "subcommand": args.command,
        "parameters": params,
        "inputs": {str(p): fio.file_digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "tool_version": tool_version(),
        "duration_seconds": time.perf_counter() - started,
    }


def _write_manifest(args, inputs, outputs, started):
    for out in outputs:
        fio.write_json(out.with_name(out.name + ".manifest.json"),
                       _manifest(args, inputs, outputs, started))


def cmd_maxent(args, started):
    constraints, space = fio.read_constraints_json(args.constraints)
    sol = solve_maxent(constraints, space)
    fio.write_distribution_csv(sol.distribution, args.out)
    outputs = [args.out]
    if args.report:
        fio.write_json(args.report, {"feasible": True, **sol.to_report()})
        outputs.append(args.report)
    _write_manifest(args, [args.constraints], outputs, started)


def cmd_radius(args):
    spec = ConcentrationSpec.for_method(args.divergence, args.delta, args.variant == "exact")
    print(fio.format_float(spec.radius(args.n, args.k)))


def cmd_fuse(args, started):
    expert = fio.read_distribution_csv(args.expert)
    counts = fio.read_counts_csv(args.counts, args.n)
    if len(counts.counts) != expert.K:
        raise ExpertMixError(
            f"{args.counts}: {len(counts.counts)} cells but the prior has {expert.K}",
            source=str(args.counts))
    try:
        emp = empirical_distribution(counts, expert.space)
    except ExpertMixError as exc:
        raise ExpertMixError(f"{args.counts}: {exc}", source=str(args.counts)) from exc
    spec = ConcentrationSpec.for_method(args.method, args.delta, args.variant == "exact")
    eps = spec.radius(counts.n, expert.K)
    report = fuse(expert, emp, eps, args.method)
    fio.write_distribution_csv(report.estimate, args.out)
    outputs = [args.out]
    if args.report:
        fio.write_json(args.report, {
            **report.to_dict(), "n": counts.n, "K": expert.K, "delta": args.delta,
            "variant": spec.variant.value})
        outputs.append(args.report)
    _write_manifest(args, [args.expert, args.counts], outputs, started)


def _sim_config(args, n_max, checkpoints):
    return SimulationConfig(
        J=args.symptoms, sigma2=args.sigma2, include_exact_prior=not args.no_exact_prior,
        delta=args.delta, variant=args.variant, n_max=n_max, checkpoints=checkpoints,
        replications=args.reps, master_seed=args.seed)


def cmd_simulate(args, started):
    config = _sim_config(args, args.n_max, args.checkpoints)
    write_trajectory_csv(run_trajectory(config, args.workers), args.out)
    _write_manifest(args, [], [args.out], started)


def cmd_coverage(args, started):
    config = _sim_config(args, args.n, (args.n,))
    report = run_coverage(config, args.workers)
    fio.write_json(args.out, {**report.to_dict(), "master_seed": args.seed})
    _write_manifest(args, [], [args.out], started)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "radius":
            if args.variant == "exact" and args.divergence == "l1":
                parser.error("no exact radius is available for --divergence l1")
            cmd_radius(args)
        elif args.command == "fuse":
            if args.variant == "exact" and args.method == "l1":
                parser.error("no exact radius is available for --method l1")
            cmd_fuse(args, started)
        else:
            {"maxent": cmd_maxent, "simulate": cmd_simulate,
             "coverage": cmd_coverage}[args.command](args, started)
    except InfeasibleConstraintsError as exc:
        _report_error(args, exc, residuals=exc.residuals)
        return 1
    except ExpertMixError as exc:
        _report_error(args, exc)
        return 1
    return 0


def _report_error(args, exc, **extra):
    payload = {"command": args.command, "error": str(exc)}
    if getattr(exc, "source", None):
        payload["source"] = exc.source
    payload.update(extra)
    print(json.dumps(fio.json_safe(payload)), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
