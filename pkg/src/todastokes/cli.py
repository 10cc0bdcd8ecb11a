"""Command-line driver: ``todastokes <subcommand> [--config FILE] [--out DIR] [--jobs N] [--seed S]``.

Exit status is 0 when every record passes, 1 when any record fails and 2 on
a configuration error. ``integral`` and ``stokes`` also accept their own
flags; any of them switches the command from the verification suite to a
single evaluation printed as JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigInvalid, MissingSeries, TodaStokesError
from .manifold import ManifoldPoint
from .report import (
    PLOTS,
    RunConfig,
    emit_plot_data,
    integral_rows,
    parse_point,
    read_key_values,
    run_suite,
    stokes_summary,
)

SUBCOMMANDS = {
    "verify-spectrum": ("spectrum",),
    "verify-metric": ("metric",),
    "formal": ("formal",),
    "integral": ("integral",),
    "resurgence": ("resurgence",),
    "stokes": ("stokes",),
    "specfun-selftest": ("specfun-selftest",),
    "report": None,
}

PLOT_HELP = """plot series (written as <out>/<name>.csv with --plots):
  slopes      columns log_abs_zeta, log_error_K2, log_error_K3 (integral suite)
  sector-map  columns arg_zeta, dominant_index (0: u_p, 1: u_-p, -1: anti-Stokes) (integral suite)
  p-grid      columns arg_p, re_m, im_m for m in -3..3, v, u at zeta = 2 e^{0.3 i} (resurgence suite)
"""

INTEGRAL_FLAGS = ("sigma", "zeta_ray", "k_max", "point_file", "vector")
STOKES_FLAGS = ("e_u", "v", "p_arg", "theta", "epsilon", "zeta_abs")


class _Exit(Exception):
    def __init__(self, code):
        self.code = code


class _Parser(argparse.ArgumentParser):
    def exit(self, status=0, message=None):
        if message:
            self._print_message(message, sys.stderr)
        raise _Exit(status)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file (N, M, tol, point, suites, out, jobs, seed, tol.<record>)")
    common.add_argument("--out", help="directory for report.json, summary.txt, plot CSVs and JSON outputs")
    common.add_argument("--jobs", type=int, help="worker processes for independent suites")
    common.add_argument("--seed", type=int, help="seed of the random test vectors")
    common.add_argument("--point", help="'special:v,e_u' or a JSON point file")
    common.add_argument("--plots", nargs="*", choices=PLOTS, help="write these plot series as CSV into --out")

    parser = _Parser(
        prog="todastokes",
        description="Verification suites for the dispersionless 2D Toda Frobenius manifold.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=PLOT_HELP,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common], formatter_class=argparse.RawDescriptionHelpFormatter,
                            epilog=PLOT_HELP)
        if name == "integral":
            g = sp.add_argument_group("single evaluation of <dy_sigma(zeta), e_m> along a ray")
            g.add_argument("--sigma", help="'p:ANGLE' for sigma(e^{i ANGLE}) with asymptotics, or a complex sigma")
            g.add_argument("--zeta-ray", nargs="+", type=float, metavar="X",
                           help="ANGLE R1 R2 ...; default: the dominant ray, |zeta| in [20, 80]")
            g.add_argument("--k-max", type=int, help="highest asymptotic order (default 3)")
            g.add_argument("--point-file", help="JSON point file (overrides --point)")
            g.add_argument("--vector", help="basis vector m, 'v' or 'u' (default 0)")
        if name == "stokes":
            g = sp.add_argument_group("single Stokes-matrix extraction at a special point")
            g.add_argument("--e-u", type=complex, help="e^u of the special point (default 0.5)")
            g.add_argument("--v", type=complex, help="v of the special point (default 0)")
            g.add_argument("--p-arg", type=float, help="arg p (default 0)")
            g.add_argument("--theta", type=float, help="argument of the admissible line (default -theta_0)")
            g.add_argument("--epsilon", type=float, help="sector sampling offset in radians (default 0.1)")
            g.add_argument("--zeta-abs", type=float, help="|zeta| used for the extraction (default 5)")
    return parser


def make_config(args):
    d = read_key_values(args.config) if args.config else {}
    for key in ("out", "jobs", "seed", "point"):
        val = getattr(args, key)
        if val is not None:
            d[key] = val
    suites = SUBCOMMANDS[args.command]
    if suites is not None:
        d["suites"] = ",".join(suites)
    return RunConfig.from_mapping(d)


def _given(args, names):
    return any(getattr(args, n, None) is not None for n in names)


def _evaluate(args, config):
    """JSON output of the integral or stokes single evaluation."""
    if args.command == "integral":
        pt = parse_point(args.point_file or config.point, config.truncation)
        ray = args.zeta_ray or []
        return integral_rows(
            pt,
            sigma=args.sigma or "p:0",
            zeta_arg=ray[0] if ray else None,
            radii=ray[1:] if len(ray) > 1 else None,
            k_max=3 if args.k_max is None else args.k_max,
            vector=args.vector or "0",
        )
    e_u = 0.5 if args.e_u is None else args.e_u
    if e_u == 0:
        raise ConfigInvalid("e^u must be nonzero")
    pt = ManifoldPoint.special(0.0 if args.v is None else args.v, e_u, config.truncation)
    return stokes_summary(
        pt,
        p_arg=args.p_arg or 0.0,
        theta=args.theta,
        eps=0.1 if args.epsilon is None else args.epsilon,
        zeta_abs=5.0 if args.zeta_abs is None else args.zeta_abs,
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Exit as exc:
        return 2 if exc.code else 0
    try:
        config = make_config(args)
    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.plots and not config.out:
        print("configuration error: --plots needs --out", file=sys.stderr)
        return 2

    flags = {"integral": INTEGRAL_FLAGS, "stokes": STOKES_FLAGS}.get(args.command, ())
    if _given(args, flags):
        try:
            result = _evaluate(args, config)
        except ConfigInvalid as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
        except TodaStokesError as exc:
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
        text = json.dumps(result, indent=1, sort_keys=True)
        print(text)
        if config.out:
            os.makedirs(config.out, exist_ok=True)
            with open(os.path.join(config.out, f"{args.command}.json"), "w") as fh:
                fh.write(text + "\n")
        return 0

    report = run_suite(config)
    sys.stdout.write(report.summary_table())
    for which in args.plots or ():
        try:
            text = emit_plot_data(report, which)
        except MissingSeries as exc:
            print(f"missing series: {exc}", file=sys.stderr)
            return 1
        with open(os.path.join(config.out, f"{which}.csv"), "w") as fh:
            fh.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
