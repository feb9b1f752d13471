"""Command-line entry point.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines; keys are
the long option names of that subcommand (dashes or underscores).  Values
from the file act as defaults and explicit flags override them.  Unknown
keys are a usage error.

Exit status: 0 when every hard criterion passes, 1 when one fails, 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .coalescent import link_discrepancy, link_table_csv
from .errors import BudgetError, DomainError, ParameterError, SamplingError
from .harness import EXPERIMENTS, ExperimentSpec, run
from .harness.experiments import _figure1_grid
from .harness.runner import collect_survivors, executor
from .limit_process import LimitConfig, tree_block
from .offspring import binary_law, build_heavy_tail
from .rng import DEFAULT_SEED
from .simulator import SimConfig, reduce, run_block, simulate_replicate

OUT_ENV = "REDUCEDBP_OUT_DIR"
DEFAULT_OUT = "results"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int(text: str) -> int:
    try:
        return int(float(text)) if "e" in str(text).lower() else int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc


def read_config(path) -> dict:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser, workers=True):
    p.add_argument("--config", metavar="FILE", help="key = value file of defaults for this subcommand")
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    if workers:
        p.add_argument("--workers", type=_int, default=1, help="worker processes (default 1); results do not depend on it")


def _law_args(p: argparse.ArgumentParser):
    p.add_argument("--law", choices=("heavy_tail", "binary"), default="heavy_tail", help="offspring law (default heavy_tail)")
    p.add_argument("--beta", type=float, default=1.0, help="tail parameter of the heavy-tailed law (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reducedbp",
        description="Reduced critical branching processes with very heavy tails: simulation and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="raw process runs: summary and per-replicate CSV")
    _law_args(p)
    p.add_argument("--t", type=float, default=20.0, help="horizon (default 20)")
    p.add_argument("--replicates", type=_int, default=10_000, help="unconditional replicates (default 10000)")
    p.add_argument("--max-events", type=_int, default=100_000_000, help="events cap per replicate (default 1e8)")
    p.add_argument("--max-population", type=_int, default=10_000_000, help="particle cap per replicate (default 1e7)")
    p.add_argument("--csv", metavar="FILE", help="write replicate_id,z,events,censored,tau here")
    _common(p)

    p = sub.add_parser("reduce", help="reduced-process trajectory dumps of surviving replicates")
    _law_args(p)
    p.add_argument("--t", type=float, default=15.0, help="horizon (default 15)")
    p.add_argument("--survivors", type=_int, default=10, help="number of surviving replicates to dump (default 10)")
    p.add_argument("--budget", type=_int, default=1_000_000, help="max replicates to try (default 1e6)")
    p.add_argument("--csv", metavar="FILE", help="output file (default stdout)")
    _common(p)

    p = sub.add_parser("limit-sample", help="limit-tree trajectories R(x) on an x-grid")
    p.add_argument("--mode", choices=("zero", "alpha"), default="zero", help="limit family (default zero)")
    p.add_argument("--beta", type=float, default=1.0, help="zero-mode parameter (default 1)")
    p.add_argument("--alpha", type=float, default=1.0, help="alpha-mode parameter in (0, 1] (default 1)")
    p.add_argument("--trees", type=_int, default=10, help="number of trees (default 10)")
    p.add_argument("--x-grid", type=_floats, default=None,
                   help="sorted positions in [0, 1-resolution) (default 41 points from 0 to 0.99, log-spaced in 1-x)")
    p.add_argument("--resolution", type=float, default=1e-3, help="resolution epsilon (default 1e-3)")
    p.add_argument("--node-cap", type=_int, default=1_000_000, help="split cap per tree (default 1e6)")
    p.add_argument("--csv", metavar="FILE", help="output file (default stdout)")
    _common(p)

    p = sub.add_parser("verify", help="run a named experiment and write its report")
    p.add_argument("--experiment", choices=EXPERIMENTS, default=None, help="experiment id (required)")
    for f in fields(ExperimentSpec):
        if f.name in ("experiment", "seed"):
            continue
        flag = "--" + f.name.replace("_", "-")
        if isinstance(f.default, tuple):
            typ, shown = _floats, ",".join(f"{v:g}" for v in f.default) or "none"
        elif isinstance(f.default, bool) or isinstance(f.default, str):
            typ, shown = str, f.default
        elif isinstance(f.default, int):
            typ, shown = _int, f"{f.default}"
        else:
            typ, shown = float, f"{f.default:g}"
        names = [flag] + (["--nmax"] if f.name == "n_max" else [])
        p.add_argument(*names, dest=f.name, type=typ, default=None, help=f"(default {shown}; per-experiment defaults apply)")
    p.add_argument("--out-dir", default=None, help=f"report directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    _common(p)

    p = sub.add_parser("coalescent", help="merger-law link discrepancy table as CSV")
    p.add_argument("--alpha", type=_floats, default=tuple(round(0.1 * i, 1) for i in range(10)),
                   help="comma-separated alphas in [0, 1) (default 0,0.1,...,0.9)")
    p.add_argument("--nmax", type=_int, default=50, help="largest block count (default 50)")
    p.add_argument("--csv", metavar="FILE", help="output file (default stdout)")
    p.add_argument("--config", metavar="FILE", help="key = value file of defaults for this subcommand")

    p = sub.add_parser("oracle", help="analytic self-consistency grid")
    p.add_argument("--law", choices=("heavy_tail", "binary"), default="heavy_tail", help="offspring law (default heavy_tail)")
    p.add_argument("--beta", type=_floats, default=(0.2, 1.0, 5.0), help="comma-separated betas (default 0.2,1,5)")
    p.add_argument("--t-grid", type=_floats, default=(10.0, 15.0, 20.0, 30.0, 40.0), help="times (default 10,15,20,30,40)")
    p.add_argument("--s-grid", type=_floats, default=(0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99),
                   help="arguments s (default 0,0.1,0.3,0.5,0.7,0.9,0.99)")
    p.add_argument("--exponent-t", type=float, default=0.0, help="also check scaling exponents at this t (default 0: skip)")
    p.add_argument("--out-dir", default=None, help=f"report directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--config", metavar="FILE", help="key = value file of defaults for this subcommand")
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sp = _subparser(parser, args.command)
        dests = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
        conf = read_config(args.config)
        unknown = sorted(set(conf) - set(dests))
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        defaults = {}
        for key, raw in conf.items():
            action = dests[key]
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"config key {key}: {raw!r} not in {sorted(action.choices)}")
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _law(args):
    return binary_law() if args.law == "binary" else build_heavy_tail(args.beta)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    law = _law(args)
    config = SimConfig(args.t, args.max_events, args.max_population, args.seed)
    block = 4096
    with executor(args.workers) as ex:
        futs = [ex.submit(run_block, law, config, s, min(block, args.replicates - s)) for s in range(0, args.replicates, block)]
        parts = [f.result() for f in futs]
    z = np.concatenate([p.z for p in parts])
    ev = np.concatenate([p.events for p in parts])
    cens = np.concatenate([p.censored for p in parts])
    tau = np.concatenate([p.tau for p in parts])
    surv = (z > 0) & ~cens
    summary = {
        "law": args.law,
        "beta": args.beta if args.law == "heavy_tail" else None,
        "t": args.t,
        "replicates": int(z.size),
        "survivors": int(surv.sum()),
        "survival_fraction": float(surv.mean()),
        "censored": int(cens.sum()),
        "mean_events": float(ev.mean()),
        "mean_size_given_survival": float(z[surv].mean()) if surv.any() else None,
        "seed": args.seed,
    }
    print(json.dumps(summary, indent=2))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate_id", "z", "events", "censored", "tau"])
            for i in range(z.size):
                w.writerow([i, int(z[i]), int(ev[i]), int(cens[i]), "" if np.isnan(tau[i]) else repr(float(tau[i]))])
    return EXIT_OK


def cmd_reduce(args) -> int:
    law = _law(args)
    config = SimConfig(args.t, seed=args.seed)
    sample = collect_survivors(law, config, args.survivors, args.budget, workers=args.workers)
    fh = _open_out(args.csv)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate_id", "u", "Z"])
        for i in sample.indices:
            traj = reduce(simulate_replicate(law, config, int(i)).genealogy, args.t)
            for u, v in zip(traj.times, traj.values):
                w.writerow([int(i), repr(float(u)), int(v)])
            w.writerow([int(i), repr(float(args.t)), int(traj.values[-1])])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if sample.exhausted:
        print(f"survival budget exhausted: {sample.accepted} of {args.survivors} survivors", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_limit_sample(args) -> int:
    kw = {"beta": args.beta} if args.mode == "zero" else {"alpha": args.alpha}
    cfg = LimitConfig(args.mode, resolution=args.resolution, node_cap=args.node_cap, **kw)
    xs = np.asarray(args.x_grid if args.x_grid else _figure1_grid(min(0.99, 1.0 - 2 * args.resolution)))
    block = tree_block(cfg, args.seed, 0, args.trees, xs)
    exact = block.exact(xs)
    fh = _open_out(args.csv)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate_id", "x", "R", "exact"])
        for i in range(args.trees):
            for j, x in enumerate(xs):
                w.writerow([i, repr(float(x)), int(block.values[i, j]), int(exact[i, j])])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _finish(report, out_dir: Path) -> int:
    path = report.write(out_dir)
    for v in report.verdicts:
        tag = "PASS" if v.passed else "FAIL"
        kind = "" if v.hard else " (info)"
        print(f"{tag} {v.criterion}{kind}: {v.description} [value={v.value:.6g}, threshold={v.threshold:.6g}]"
              if isinstance(v.value, float) and isinstance(v.threshold, float)
              else f"{tag} {v.criterion}{kind}: {v.description}")
    for f in report.failures:
        print(f"FAIL {f.get('label', '')}: {f.get('reason', '')}")
    print(f"report: {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.experiment is None:
        raise UsageError("verify needs --experiment (or an experiment key in the config file)")
    overrides = {f.name: getattr(args, f.name) for f in fields(ExperimentSpec)
                 if f.name not in ("experiment", "seed") and getattr(args, f.name, None) is not None}
    overrides["seed"] = args.seed
    spec = ExperimentSpec.for_experiment(args.experiment, **overrides)
    return _finish(run(spec, workers=args.workers), _out_dir(args))


def cmd_coalescent(args) -> int:
    if any(not 0 <= a < 1 for a in args.alpha):
        raise ParameterError("alpha values must lie in [0, 1)")
    if args.nmax < 2:
        raise ParameterError("nmax must be at least 2")
    fh = _open_out(args.csv)
    try:
        fh.write(link_table_csv(args.alpha, args.nmax))
    finally:
        if fh is not sys.stdout:
            fh.close()
    worst = max(float(link_discrepancy(a, args.nmax).max()) for a in args.alpha)
    return EXIT_OK if worst < 1e-12 else EXIT_FAIL


def cmd_oracle(args) -> int:
    spec = ExperimentSpec.for_experiment(
        "oracle_consistency",
        law=args.law,
        beta=args.beta,
        t_grid=args.t_grid,
        s_grid=args.s_grid,
        exponent_t=args.exponent_t,
    )
    return _finish(run(spec), _out_dir(args))


COMMANDS = {
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
    "limit-sample": cmd_limit_sample,
    "verify": cmd_verify,
    "coalescent": cmd_coalescent,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"reducedbp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, DomainError) as exc:
        print(f"reducedbp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetError, SamplingError) as exc:
        print(f"reducedbp: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
