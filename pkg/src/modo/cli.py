"""Command line entry point: ``modo sweep|preset|stability|check``.

Exit codes: 0 when everything succeeded, 2 when some sweep cells or checks
failed, 1 for configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import __version__, checks, harness


def _overrides(cfg, args):
    kw = {}
    if args.out is not None:
        kw["out_dir"] = args.out
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    if getattr(args, "record_every", None) is not None:
        kw["record_every"] = args.record_every
    if getattr(args, "timing", False):
        kw["timing"] = True
    return dataclasses.replace(cfg, **kw) if kw else cfg


def _summary(results, out_dir) -> int:
    failed = results.failed
    print(f"{len(results.agg_rows)} cells, {len(results.long_rows)} rows -> {out_dir}")
    for f in failed:
        print(f"failed: {f}")
    return 2 if failed else 0


def _cmd_sweep(args) -> int:
    cfg = _overrides(harness.SweepConfig.from_json(args.config), args)
    return _summary(harness.run_sweep(cfg, args.workers), cfg.out_dir)


def _cmd_preset(args) -> int:
    out = args.out or f"results/{args.name}"
    if args.name == "figure2":
        res = harness.run_figure2(tuple(range(args.seeds)), out, args.workers)
    elif args.name == "figure3":
        res = harness.run_figure3(args.T or harness.TOY_T, out_dir=out, workers=args.workers)
    else:
        if args.regime is None or args.n is None:
            raise ValueError("tradeoff needs --regime and --n")
        base = harness.SweepConfig(seeds=tuple(range(args.seeds)), out_dir=out)
        res = harness.run_tradeoff_preset(args.regime, args.n, base, args.workers)
    return _summary(res, out)


def _cmd_stability(args) -> int:
    with open(args.config) as fh:
        cfg = harness.StabilityConfig.from_dict(json.load(fh))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    rep = harness.run_stability(cfg)
    for r in rep["reports"]:
        lb = "" if r["lower_bound"] is None else f" lower={r['lower_bound']:.4g}"
        print(f"n={r['n']} arg={r['arg_stability']:.4g} arg_sq={r['arg_stability_sq']:.4g} "
              f"mol_sq={r['mol_stability_sq']:.4g} upper={r['upper_bound']:.4g}{lb}")
    if rep["slope_arg_stability_sq"] is not None:
        print(f"log-log slope of arg_sq: {rep['slope_arg_stability_sq']:.3f}")
    return 0


def _cmd_check(args) -> int:
    results = checks.run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 2


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for failed cells; bad usage is a configuration error
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modo", description="MoDo multi-objective learning experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", help="run a sweep from a JSON config")
    s.add_argument("config")
    s.add_argument("--out")
    s.add_argument("--tol", type=float)
    s.add_argument("--record-every", type=int)
    s.add_argument("--timing", action="store_true", help="fill wall_ns with run wall time")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("preset", help="run a built-in experiment")
    s.add_argument("name", choices=("figure2", "figure3", "tradeoff"))
    s.add_argument("--regime", choices=harness.REGIMES)
    s.add_argument("--n", type=int)
    s.add_argument("--seeds", type=int, default=10, help="number of seeds (figure2, tradeoff)")
    s.add_argument("--T", type=int, help="horizon override (figure3)")
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_preset)

    s = sub.add_parser("stability", help="coupled-run stability estimates from a JSON config")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_stability)

    s = sub.add_parser("check", help="run the built-in correctness suites")
    s.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
