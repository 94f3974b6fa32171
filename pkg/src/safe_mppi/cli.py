"""Command-line front end: ``safe-mppi {run,sweep,compare,plot}``.

Exit codes: 0 success, 1 configuration / I/O error, 2 episode did not reach
the goal (``run`` only).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from .controller import VARIANTS
from .harness.artifacts import PLOT_KINDS, render_from_run_dir, write_run_outputs
from .harness.episode import run_episode
from .harness.io import table_text, atomic_write_text, write_jsonl
from .harness.plotting import render_cost_svg
from .harness.scenarios import ConfigError, get_scenario, load_experiment, make_planner_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2

SWEEP_HEADER = ["variant", "K", "seed", "completed", "steps", "total_cost", "min_h", "mean_safe_frac"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for non-completion here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("sample list must be non-empty positive integers")
    return vals


def _variant_list(text: str) -> List[str]:
    vals = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in vals if v not in VARIANTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown variant(s) {', '.join(bad)}; expected {', '.join(VARIANTS)}")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="safe-mppi", description="Sampling-based planning with barrier-function safety layers.")
    sub = p.add_subparsers(dest="command", metavar="{run,sweep,compare,plot}", parser_class=_Parser)
    sub.required = True

    def source(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--config", help="scenario file with [scenario], [controller], [cost], [run] sections")
        g.add_argument("--scenario", help="built-in scenario name (single_obstacle, narrow_passage)")

    def common(sp):
        sp.add_argument("--workers", type=_positive, default=None, help="threads for the per-step rollout map")
        sp.add_argument("--out", required=True, help="output directory")

    r = sub.add_parser("run", help="run one episode", description="Run one episode and write its files.")
    source(r)
    r.add_argument("--variant", choices=VARIANTS, help="planner variant (default from config or trust_region)")
    r.add_argument("--samples", type=_positive, help="number of samples K")
    r.add_argument("--seed", type=int, help="random seed")
    common(r)

    s = sub.add_parser("sweep", help="sample-size by seed sweep", description="Cartesian runs over sample sizes and seeds.")
    source(s)
    s.add_argument("--variant", choices=VARIANTS, help="planner variant")
    s.add_argument("--samples", type=_int_list, default=[50, 100, 200, 500], help='comma list, e.g. "50,100,200,500"')
    s.add_argument("--seeds", type=_positive, default=1, help="number of seeds N (base..base+N-1)")
    s.add_argument("--seed", type=int, default=None, help="base seed")
    common(s)

    c = sub.add_parser("compare", help="variants on matched seeds", description="Run variants on matched seeds.")
    source(c)
    c.add_argument("--variants", type=_variant_list, default=["mppi", "trust_region"], help='comma list, e.g. "mppi,trust_region"')
    c.add_argument("--samples", type=_positive, help="number of samples K")
    c.add_argument("--seeds", type=_positive, default=1, help="number of seeds N (base..base+N-1)")
    c.add_argument("--seed", type=int, default=None, help="base seed")
    common(c)

    pl = sub.add_parser("plot", help="re-render figures of a run", description="Re-render a figure from a run directory.")
    pl.add_argument("--run", required=True, help="directory written by the run command")
    pl.add_argument("--kind", choices=PLOT_KINDS, default="trajectory", help="figure type")
    pl.add_argument("--out", required=True, help="output SVG file")
    return p


def _experiment(args, variant=None, samples=None, seed=None):
    """(scenario, params, planner config) from --config / --scenario plus flag overrides."""
    if getattr(args, "config", None):
        exp = load_experiment(args.config)
        scenario, params, base = exp.scenario, exp.params, exp.planner
        variant = variant or base.variant
        samples = samples or base.samples
        seed = base.seed if seed is None else seed
        overrides = dict(
            alpha=base.alpha, trust_c=base.trust_c, exact_chance=base.exact_chance,
            shared_sdp=base.shared_sdp, workers=base.workers, dt=base.dt, mu0=base.mu0,
            Sigma0=base.Sigma0, delta=base.delta,
        )
        if variant == base.variant:
            overrides["horizon"] = base.horizon
    else:
        scenario, params = get_scenario(args.scenario or "single_obstacle")
        variant = variant or "trust_region"
        samples = samples or 100
        seed = 0 if seed is None else seed
        overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    config = make_planner_config(params, variant, samples, seed, **overrides)
    return scenario, params, config


def cmd_run(args) -> int:
    scenario, params, config = _experiment(args, args.variant, args.samples, args.seed)
    record = run_episode(scenario, config, params)
    write_run_outputs(args.out, scenario, params, record, extra={"seeds": [config.seed]})
    return EXIT_OK if record.completed else EXIT_INCOMPLETE


def _run_row(scenario, params, config):
    try:
        rec = run_episode(scenario, config, params)
    except Exception as exc:  # recorded, not fatal
        print(f"run variant={config.variant} K={config.samples} seed={config.seed} failed: {exc}", file=sys.stderr)
        return None, [config.variant, config.samples, config.seed, False, 0, float("nan"), float("nan"), float("nan")]
    s = rec.summary(params.dt)
    return rec, [config.variant, config.samples, config.seed, rec.completed, rec.steps,
                 s["total_cost"], s["min_h"], s["mean_safe_frac"]]


def _base_seed(args):
    if args.seed is not None:
        return args.seed
    if args.config:
        return load_experiment(args.config).planner.seed
    return 0


def cmd_sweep(args) -> int:
    base = _base_seed(args)
    seeds = list(range(base, base + args.seeds))
    jobs = [_experiment(args, args.variant, K, s) for K in args.samples for s in seeds]
    rows = [_run_row(*job)[1] for job in jobs]
    atomic_write_text(os.path.join(args.out, "sweep.csv"), table_text(SWEEP_HEADER, rows))
    # per-K means over seeds
    mean_rows = []
    for K in args.samples:
        sel = [r for r in rows if r[1] == K]
        mean_rows.append([
            sel[0][0], K, len(sel), float(np.mean([r[3] for r in sel])),
            float(np.mean([r[4] for r in sel])), float(np.mean([r[5] for r in sel])),
            float(np.min([r[6] for r in sel])), float(np.mean([r[7] for r in sel])),
        ])
    atomic_write_text(
        os.path.join(args.out, "sweep_mean.csv"),
        table_text(["variant", "K", "runs", "completion_rate", "mean_steps", "mean_total_cost", "min_h", "mean_safe_frac"], mean_rows),
    )
    return EXIT_OK


def _column_labels(variants):
    labels, seen = [], {}
    for v in variants:
        seen[v] = seen.get(v, 0) + 1
        labels.append(v if seen[v] == 1 else f"{v}_{seen[v]}")
    return labels


def cmd_compare(args) -> int:
    if len(args.variants) < 2:
        raise UsageError("compare needs at least two variants")
    base = _base_seed(args)
    seeds = list(range(base, base + args.seeds))
    labels = _column_labels(args.variants)
    fields = ["completed", "steps", "total_cost", "min_h", "mean_safe_frac"]
    header = ["seed"] + [f"{lab}_{f}" for lab in labels for f in fields]
    table = []
    curves = {}
    for s in seeds:
        row = [s]
        for lab, v in zip(labels, args.variants):
            scenario, params, config = _experiment(args, v, args.samples, s)
            rec, r = _run_row(scenario, params, config)
            row += r[3:]
            if s == seeds[0]:
                steps = np.array([x.step for x in rec.rows]) if rec else np.zeros(0)
                q = np.array([x.q for x in rec.rows]) if rec else np.zeros(0)
                curves[lab] = (steps, q)
        table.append(row)
    atomic_write_text(os.path.join(args.out, "compare.csv"), table_text(header, table))
    render_cost_svg(os.path.join(args.out, "cost.svg"), curves, title=f"running cost, seed {seeds[0]}")
    return EXIT_OK


def cmd_plot(args) -> int:
    render_from_run_dir(args.run, args.kind, args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "plot": cmd_plot}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, OSError, ValueError) as exc:
        print(f"safe-mppi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
