"""Command line entry point.

Exit status: 0 when every verdict is pass or unadjudicated, 1 when any verdict
fails, 2 on configuration or runtime errors.
"""

import argparse
import json
import sys

from . import harness
from .integrate import ConfigError, DriftError

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _status(verdicts):
    verdicts = list(verdicts)
    if harness.ERROR in verdicts:
        return EXIT_ERROR
    if harness.FAIL in verdicts:
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(args):
    res = harness.run(harness.RunConfig.load(args.config), out_dir=args.out_dir)
    s = res.summary
    print(f"verdict={res.verdict} D_end={s['D_end']:.3e} tail_sup_Lmax={s['tail_sup_Lmax']:.3e} "
          f"max_norm_dev={s['max_norm_dev']:.3e} out_dir={args.out_dir}")
    if res.report is not None:
        print(f"prediction={res.report.prediction} bound={res.report.bound}")
    return _status([res.verdict])


def cmd_check(args):
    for rep in harness.check(harness.RunConfig.load(args.config)):
        sys.stdout.write(rep.to_text())
        print()
    return EXIT_OK


def cmd_sweep(args):
    rows = harness.sweep(harness.SweepConfig.load(args.config), out_dir=args.out_dir, parallel=args.parallel)
    for r in rows:
        extra = f" error={r['error']}" if r["error"] else ""
        print(f"[{r['index']}] verdict={r['verdict']} tail_sup_Lmax={r['tail_sup_Lmax']}{extra}")
    return _status(r["verdict"] for r in rows)


def cmd_compare_reduction(args):
    out = harness.compare_reduction(harness.RunConfig.load(args.config))
    print(harness.dump_json(out))
    return _status([out["verdict"]])


def cmd_compare_splitting(args):
    out = harness.compare_splitting(harness.RunConfig.load(args.config))
    print(harness.dump_json(out))
    return _status([out["verdict"]])


def build_parser():
    parser = argparse.ArgumentParser(prog="lohesim", description="Delayed Lohe Hermitian sphere simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one configuration and adjudicate it")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("check", help="evaluate theorem gates only")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("compare-reduction", help="complex vs real sphere vs Kuramoto legs")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_compare_reduction)

    p = sub.add_parser("compare-splitting", help="check z = exp(Omega t) w for a common flow")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_compare_splitting)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_ERROR if err.code else EXIT_OK
    try:
        return args.fn(args)
    except (ConfigError, DriftError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
