"""Command-line entry point.

Exit status is 0 when every verdict passes, 1 when any fails and 2 for
configuration or validation errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, GeometryError, LaminationError
from .experiments import ExperimentSpec, Result, run
from .io import load_config

log = logging.getLogger("geocurrents")

# subcommand -> experiment kinds it can run
COMMANDS = {
    "liouville": ("liouville",),
    "quake-eval": ("quake_eval",),
    "converge": ("theorem71", "lemma61"),
    "ineq": ("prop93", "lemma92", "lemma94"),
    "bonahon": ("bonahon",),
    "mcg": ("mcg",),
    "supnorm": ("supnorm",),
    "all": ("liouville", "quake_eval", "theorem71", "lemma61", "prop93", "lemma92", "lemma94", "bonahon", "mcg", "supnorm"),
}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", type=Path, default=d(None), help="YAML or JSON config file")
    parser.add_argument("--seed", type=_u64, default=d(None), help="master seed (default 0 or the config value)")
    parser.add_argument("--out", type=Path, default=d(Path("results")), help="output directory")
    parser.add_argument("--jobs", type=_positive, default=d(None), help="worker processes")
    parser.add_argument("--plot-data", action="store_true", default=d(False), help="also write (t, error) series")
    parser.add_argument("-q", "--quiet", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geocurrents", description="Geodesic current and earthquake experiments.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    add("liouville", "closed form, invariance, quadrature and inversion checks")
    sp = add("quake-eval", "evaluate an earthquake and sweep structural invariants")
    sp.add_argument("--lamination", help="lamination file (p q weight per leaf)")
    sp.add_argument("--t", type=float, help="earthquake scale")
    sp = add("converge", "scaled pull-back convergence")
    sp.add_argument("--kind", choices=("theorem71", "lemma61", "all"), default="all")
    sp.add_argument("--lamination", help="lamination file for theorem71")
    sp.add_argument("--growth", choices=("n", "n2"), help="t_n growth for lemma61")
    sp = add("ineq", "comparison inequalities and closed forms")
    sp.add_argument("--kind", choices=("prop93", "lemma92", "lemma94", "all"), default="all")
    add("bonahon", "complementary-box identity and divergence dichotomy")
    sp = add("mcg", "push-forward by a fixed circle map")
    sp.add_argument("--g", choices=("identity", "mobius", "earthquake"))
    add("supnorm", "supremum-norm estimates")
    add("all", "run every experiment")
    return parser


def _overrides(args, kind: str) -> dict:
    over = {}
    if getattr(args, "lamination", None) and kind in ("quake_eval", "theorem71"):
        over["lamination"] = args.lamination
    if getattr(args, "t", None) is not None and kind == "quake_eval":
        over["t"] = args.t
    if getattr(args, "growth", None) and kind == "lemma61":
        over["growth"] = args.growth
    if getattr(args, "g", None) and kind == "mcg":
        over["g"] = args.g
    return over


def _kinds(args) -> tuple[str, ...]:
    kinds = COMMANDS[args.command]
    sel = getattr(args, "kind", "all")
    return kinds if sel == "all" else (sel,)


def report(res: Result, stream=sys.stdout) -> None:
    for name, v in res.verdicts.items():
        status = "PASS" if v["pass"] else "FAIL"
        thr = f" threshold={v['threshold']}" if "threshold" in v else ""
        print(f"{status} {res.name}/{name} measured={v['measured']}{thr}", file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        config = load_config(args.config)
        specs = []
        for kind in _kinds(args):
            cfg = dict(config)
            section = dict(cfg.get(kind) or {})
            section.update(_overrides(args, kind))
            cfg[kind] = section
            specs.append(ExperimentSpec.from_config(kind, cfg, seed=args.seed, jobs=args.jobs, out=args.out, plot_data=args.plot_data))
        ok = True
        for spec in specs:
            res = run(spec)
            if not args.quiet:
                report(res)
            ok &= res.passed
    except (ConfigError, LaminationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    log.info("results written to %s", args.out)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
