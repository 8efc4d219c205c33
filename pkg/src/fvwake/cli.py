"""Command-line entry point.

Verbs: sweep-induction, sweep-yaw, convergence, gradcheck, empc,
flowfield, simulate. Exit codes: 0 success, 1 configuration error,
2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ExperimentConfig
from .control import NumericalFailure
from . import experiments

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        exp = ExperimentConfig.from_json(args.config)
    elif args.dim == 3:
        exp = ExperimentConfig.preset_3d_yaw()
    else:
        exp = ExperimentConfig.preset_2d_induction()
    if args.out is not None:
        exp.output_dir = args.out
    if args.seed is not None:
        exp.seed = args.seed
    return exp


def _common(sub):
    sub.add_argument("--config", help="experiment config JSON")
    sub.add_argument("--dim", type=int, choices=(2, 3), default=2,
                     help="preset dimensionality when no config is given")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--seed", type=int, help="random seed override")
    sub.add_argument("--threads", type=int, default=1,
                     help="parallel workers for independent grid points")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fvwake",
        description="Free-vortex wake simulation and adjoint-based power optimization",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="constant-control simulation")
    _common(s)

    s = sub.add_parser("sweep-induction", help="steady power vs upstream induction")
    _common(s)
    s.add_argument("--a-min", type=float, default=0.0)
    s.add_argument("--a-max", type=float, default=0.5)
    s.add_argument("--a-step", type=float, default=0.025)

    s = sub.add_parser("sweep-yaw", help="steady power vs upstream yaw")
    _common(s)
    s.add_argument("--psi-min-deg", type=float, default=-45.0)
    s.add_argument("--psi-max-deg", type=float, default=45.0)
    s.add_argument("--psi-step-deg", type=float, default=5.0)

    s = sub.add_parser("convergence", help="normalized power vs discretization")
    _common(s)

    s = sub.add_parser("gradcheck", help="adjoint-vs-finite-difference verification")
    _common(s)
    s.add_argument("--corrupt-block", help="zero one Jacobian block (fault injection)")

    s = sub.add_parser("empc", help="receding-horizon power optimization")
    _common(s)

    s = sub.add_parser("flowfield", help="sample a saved snapshot onto a grid")
    _common(s)
    s.add_argument("snapshot", help="snapshot file written by empc/simulate")
    s.add_argument("--nx", type=int, default=240)
    s.add_argument("--ny", type=int, default=80)
    s.add_argument("--x-min", type=float, default=-1.0)
    s.add_argument("--x-max", type=float, default=8.0)
    s.add_argument("--y-min", type=float, default=-2.0)
    s.add_argument("--y-max", type=float, default=2.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = _load_config(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = exp.output_dir
    os.makedirs(out_dir, exist_ok=True)

    try:
        if args.command == "simulate":
            experiments.run_simulate(exp, out_dir)
            print(f"simulation written to {out_dir}")
        elif args.command == "sweep-induction":
            grid = np.arange(args.a_min, args.a_max + 1e-12, args.a_step)
            res = experiments.run_sweep_induction(exp, grid, out_dir, args.threads)
            best = res.values[np.argmax(res.totals)]
            print(f"sweep written to {out_dir}; best total power at a={best:.3f}")
        elif args.command == "sweep-yaw":
            grid = np.deg2rad(
                np.arange(args.psi_min_deg, args.psi_max_deg + 1e-9, args.psi_step_deg)
            )
            res = experiments.run_sweep_yaw(exp, grid, out_dir, args.threads)
            best = np.rad2deg(res.values[np.argmax(res.totals)])
            print(f"sweep written to {out_dir}; best total power at psi={best:.1f} deg")
        elif args.command == "convergence":
            experiments.run_convergence(exp, out_dir)
            print(f"convergence table written to {out_dir}")
        elif args.command == "gradcheck":
            report = experiments.run_gradcheck(out_dir, corrupt=args.corrupt_block)
            for case in ("2d", "3d"):
                entry = report[case]
                status = "pass" if entry["pass"] else "FAIL"
                print(f"gradcheck {case}: max rel err {entry['max_rel_err']:.3e} [{status}]")
            if not report["pass"]:
                return EXIT_VERIFICATION
        elif args.command == "empc":
            _, summary = experiments.run_empc(exp, out_dir)
            print(f"trajectory written to {out_dir}")
            print(json.dumps(summary, indent=2))
        elif args.command == "flowfield":
            out_path = os.path.join(out_dir, "flowfield.csv")
            experiments.run_flowfield(
                args.snapshot, out_path,
                xlim=(args.x_min, args.x_max), ylim=(args.y_min, args.y_max),
                nx=args.nx, ny=args.ny,
            )
            print(f"flow field written to {out_path}")
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
