"""Command-line entry point: ``pptmix <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis
from .config import load_settings
from .errors import InvalidArgumentError, PptMixError, SolverError
from .pi_state import StateSpec
from .selftest import selftest


def _read_state(arg: str) -> StateSpec:
    """``arg`` is a path to a JSON file or an inline JSON object."""
    text = arg.strip()
    if not text.startswith("{"):
        path = Path(arg)
        if not path.is_file():
            raise InvalidArgumentError(f"state file {arg} does not exist")
        text = path.read_text()
    return StateSpec.from_json(text)


def _emit(obj: dict):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _require_optimal(status: str, what: str):
    if status != "optimal":
        raise SolverError(f"{what}: solver status {status}")


def cmd_analyze(args, settings) -> int:
    spec = _read_state(args.state)
    report = analysis.analyze(spec, settings)
    if args.json:
        _emit(report.to_json())
    else:
        print(f"N={report.n_qubits}  s_opt={report.s_opt:.9g}  verdict={report.verdict}  "
              f"status={report.status}  wall={report.wall_time:.3f}s")
    _require_optimal(report.status, "analyze")
    return 0


def cmd_noise_tolerance(args, settings) -> int:
    spec = _read_state(args.state)
    result = analysis.noise_tolerance(spec, args.tol, settings)
    if args.json:
        _emit(result.to_dict())
    elif result.detected:
        print(f"p*={result.p_star:.9g}  noise tolerance={result.tolerance:.9g}  "
              f"bracket=[{result.lo:.9g}, {result.hi:.9g}]  solves={result.solve_count}")
    else:
        print(f"never detected: s_opt(p=1)={result.s_hi:.9g} >= 0; p*=1 (sentinel)")
    return 0


def cmd_scan_plane(args, settings) -> int:
    result = analysis.scan_plane(args.n, args.step, settings)
    text = result.to_csv(timing=not args.no_timing)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        detected = sum(p.verdict == "gme" for p in result.grid)
        print(f"wrote {len(result.grid)} points ({detected} detected) to {args.out}")
    failed = [p for p in result.grid if p.status != "optimal"]
    if failed:
        raise SolverError(f"{len(failed)} grid points did not solve to optimality")
    return 0


def cmd_certify(args, settings) -> int:
    spec = _read_state(args.state)
    state = spec.build()
    cert = analysis.certify_biseparable_3q(state, settings)
    _emit(cert.to_dict())
    return 0


def cmd_selftest(args, settings) -> int:
    report = selftest(args.max_n, args.seed, settings)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pptmix",
        description="PPT-mixture tests of genuine multipartite entanglement for permutationally "
                    "invariant qubit states.",
    )
    parser.add_argument("--config", help="JSON file overriding tolerances and limits")
    parser.add_argument("--workers", type=int, help="parallel solves (overrides PPTMIX_WORKERS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="verdict for a single state")
    p.add_argument("--state", required=True, help="state spec: JSON file or inline JSON")
    p.add_argument("--json", action="store_true", help="print the JSON report")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("noise-tolerance", help="critical purity under white noise")
    p.add_argument("--state", required=True)
    p.add_argument("--tol", type=float, default=None, help="bracket width (default from config)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_noise_tolerance)

    p = sub.add_parser("scan-plane", help="s_opt over the GHZ/W/noise simplex, as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True, help="CSV path, or - for stdout")
    p.add_argument("--no-timing", action="store_true", help="leave solve_seconds empty")
    p.set_defaults(func=cmd_scan_plane)

    p = sub.add_parser("certify", help="three-qubit biseparability certificate")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("selftest", help="dense-versus-block cross-validation")
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.config).updated(workers=args.workers)
        return args.func(args, settings)
    except PptMixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
