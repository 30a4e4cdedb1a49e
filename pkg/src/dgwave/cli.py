"""Command-line entry point: ``dgwave solve`` and ``dgwave study``."""
import argparse
import logging
import sys

from .bench import (
    PAPER_H,
    PAPER_Q,
    ConvergenceRow,
    StudyPlan,
    emit_csv,
    emit_plot_data,
    paper_config,
    run_single,
    run_study,
)
from .errors import DGWaveError

EXIT_SOLVER = 2
EXIT_IO = 3


def _common(parser):
    parser.add_argument("--gamma", type=float, default=1.0, help="damping parameter (default 1)")
    parser.add_argument("--T", type=float, default=1.0, help="final time (default 1)")
    parser.add_argument("--picard-tol", type=float, default=1e-10)
    parser.add_argument("--picard-max", type=int, default=30)
    parser.add_argument(
        "--picard-acceleration", choices=("anderson", "none"), default="anderson",
        help="'none' runs unaccelerated Picard passes",
    )
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dgwave",
        description="DG-in-time / CG-in-space solver for a 1D nonlinear damped wave equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="single run on the manufactured problem")
    solve.add_argument("--q", type=int, default=2, help="temporal degree (>= 2)")
    solve.add_argument("--p", type=int, default=None, help="spatial degree (default: q)")
    solve.add_argument("--h", type=float, default=0.25, help="mesh size; k = h**2")
    _common(solve)

    study = sub.add_parser("study", help="convergence table over (q, h)")
    study.add_argument("--q", type=int, nargs="+", default=list(PAPER_Q))
    study.add_argument("--p", type=int, nargs="+", default=None,
                       help="spatial degrees matching --q (default: p = q)")
    study.add_argument("--h", type=float, nargs="+", default=list(PAPER_H))
    study.add_argument("--plot-out", help="CSV of (q, 1/k, error) series")
    study.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _common(study)
    return parser


def _solve(args):
    cfg = paper_config(
        args.q, args.h, p=args.p, gamma=args.gamma, T=args.T,
        picard_tol=args.picard_tol, picard_max=args.picard_max,
        picard_acceleration=args.picard_acceleration,
    )
    result = run_single(cfg)
    print(f"q={cfg.q} p={cfg.p} h={cfg.h:.6g} k={cfg.k:.6g} slabs={cfg.n_slabs}")
    print(f"error={result.error:.5e}")
    print(
        f"picard: max_iterations={result.max_iterations} "
        f"max_residual={max(result.residuals):.3e} converged={result.converged}"
    )
    if args.out:
        emit_csv([ConvergenceRow(cfg.q, cfg.h, cfg.k, result.error)], args.out)


def _study(args):
    plan = StudyPlan(
        gamma=args.gamma, T=args.T, h_values=tuple(args.h), q_values=tuple(args.q),
        p_values=tuple(args.p) if args.p else None,
        picard_tol=args.picard_tol, picard_max=args.picard_max,
        picard_acceleration=args.picard_acceleration,
    )
    rows, results = run_study(plan, jobs=args.jobs)
    print("q,h,k,error,rate,picard_max_iterations")
    for row in rows:
        rate = "" if row.rate is None else f"{row.rate:.4f}"
        print(f"{row.q},{row.h:.5e},{row.k:.5e},{row.error:.5e},{rate},{row.max_iterations}")
    if not all(r.converged for r in results):
        logging.getLogger(__name__).warning("some slabs hit the Picard iteration cap")
    if args.out:
        emit_csv(rows, args.out)
    if args.plot_out:
        emit_plot_data(rows, args.plot_out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "solve":
            _solve(args)
        else:
            _study(args)
    except (DGWaveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
