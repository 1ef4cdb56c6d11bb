"""Console entry point.

Thread-count pinning has to happen before numpy loads its BLAS, so this
module must not import numpy (directly or via the package) at the top
level; the heavy imports live inside main().
"""

from __future__ import annotations

import argparse
import json
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _apply_thread_env() -> None:
    n = os.environ.get("PHOTONKIN_THREADS")
    if not n:
        return
    if not n.isdigit() or int(n) < 1:
        print(f"photonkin: ignoring PHOTONKIN_THREADS={n!r} (want a positive integer)",
              file=sys.stderr)
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, n)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonkin",
        description="Photon kinematics checks: frames, commutators, evolution, "
                    "field equations, arrival statistics.",
    )
    parser.add_argument("task", help="one of: validate, %(choices)s".replace(
        "%(choices)s", ", ".join((
            "verify-frames", "verify-commutators", "evolve", "maxwell-check",
            "arrival", "kernel-check", "position-density",
        ))))
    parser.add_argument("--config", required=True, help="path to a JSON scenario config")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed; overrides the config's seed field")
    parser.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every gate threshold by this factor")
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)

    from . import cli  # deferred: pulls in numpy

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        print(f"photonkin: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"photonkin: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.task == "validate":
        task = config.get("task") if isinstance(config, dict) else None
        diags = cli.validate_config(config, task if task in cli.TASKS else None)
        print(json.dumps({"valid": not diags, "diagnostics": diags},
                         sort_keys=True, indent=2))
        return EXIT_OK if not diags else EXIT_CONFIG

    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("photonkin: --seed must lie in [0, 2^64)", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = cli.run_task(
            args.task, config, args.out,
            seed=args.seed, tolerance_scale=args.tolerance_scale,
        )
    except cli.ConfigError as exc:
        for line in exc.diagnostics:
            print(f"photonkin: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"photonkin: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO

    for name, gate in report["gates"].items():
        status = "pass" if gate["pass"] else "FAIL"
        print(f"{status}  {name}: {gate['value']:.3e} <= {gate['threshold']:.3e}")
    print(f"report: {os.path.join(args.out, 'report.json')}")
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
