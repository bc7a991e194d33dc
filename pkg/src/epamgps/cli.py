"""Command-line entry point.

    epamgps features [--out DIR]
    epamgps epam run CONFIG... [--out DIR] [--seed N] [--jobs N]
    epamgps epam probe CONFIG [--probes DAQ,KOX] [--out DIR] [--seed N]
    epamgps gps solve TASK [--out DIR] [--budget-depth N] [--budget-goals N]
                           [--lookahead on|off]

Exit codes: 0 success; 1 usage, config, parse or I/O error; 2 EPAM run hit
max_trials before criterion; 3 GPS found no solution; 4 GPS budget exhausted.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

from . import codec, dnet
from .epam import DEFAULT_SEED, criterion_trial, perform, retroactive_inhibition, run_experiment
from .gps.solver import BudgetExhausted, NoSolution, SearchBudget, solve
from .harness import ConfigError, load_config, metrics_text, sort_trace_text, trials_csv
from .taskenv import BUILTINS, TaskSyntaxError, builtin_path, load_task

EXIT_OK, EXIT_ERROR, EXIT_MAX_TRIALS, EXIT_NO_SOLUTION, EXIT_BUDGET = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 means "max trials" here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return EXIT_ERROR


# -- features ---------------------------------------------------------------


def cmd_features(args) -> int:
    try:
        _write(Path(args.out), "features.csv", codec.feature_table_csv())
    except OSError as e:
        return _fail(f"cannot write features.csv: {e}")
    return EXIT_OK


# -- epam ---------------------------------------------------------------------


def _run_one(config_path: str, out: str, seed: Optional[int]) -> tuple:
    """Run one config; returns (exit code, message). Picklable for --jobs."""
    try:
        cfg = load_config(config_path, seed)
    except (OSError, ConfigError) as e:
        return EXIT_ERROR, str(e)
    sched = cfg.schedule
    net = dnet.DiscriminationNet()
    records = run_experiment(sched, net)
    report = None
    if cfg.pairs_b:
        report = retroactive_inhibition(
            sched.pairs,
            cfg.pairs_b,
            order=sched.order,
            seed=sched.seed,
            criterion=sched.criterion,
            max_trials=sched.max_trials,
        )
    outdir = Path(out)
    try:
        _write(outdir, "trials.csv", trials_csv(records))
        _write(outdir, "net.dump", dnet.dump(net))
        _write(outdir, "metrics.txt", metrics_text(sched, records, net, report))
    except OSError as e:
        return EXIT_ERROR, f"cannot write results: {e}"
    reached = criterion_trial(records, sched.criterion)
    if reached is None:
        return EXIT_MAX_TRIALS, f"{config_path}: criterion not reached in {sched.max_trials} trials"
    return EXIT_OK, f"{config_path}: criterion reached at trial {reached}"


def cmd_epam_run(args) -> int:
    configs = args.config
    if len(configs) == 1:
        jobs = [(configs[0], args.out)]
    else:
        stems = [Path(c).stem for c in configs]
        if len(set(stems)) != len(stems):
            return _fail("config files need distinct names when running several")
        jobs = [(c, str(Path(args.out) / s)) for c, s in zip(configs, stems)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, *zip(*jobs), [args.seed] * len(jobs)))
    else:
        results = [_run_one(c, o, args.seed) for c, o in jobs]
    for code, msg in results:
        print(msg, file=sys.stderr if code == EXIT_ERROR else sys.stdout)
    codes = [c for c, _ in results]
    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return max(codes)


def cmd_epam_probe(args) -> int:
    try:
        cfg = load_config(args.config, args.seed)
    except (OSError, ConfigError) as e:
        return _fail(str(e))
    probes = cfg.probes
    if args.probes:
        try:
            probes = tuple(codec.syllable(p) for p in args.probes.split(",") if p.strip())
        except ValueError as e:
            return _fail(f"bad probe: {e}")
    if not probes:
        probes = tuple(p.stimulus for p in cfg.schedule.pairs)
    net = dnet.DiscriminationNet()
    records = run_experiment(cfg.schedule, net)
    rows = ["probe,produced"]
    traces = []
    for p in probes:
        r = perform(net, p)
        rows.append(f"{p},{r if r else 'none'}")
        traces.append(sort_trace_text(net, p))
    try:
        out = Path(args.out)
        _write(out, "probe.csv", "\n".join(rows) + "\n")
        _write(out, "probe_trace.txt", "".join(traces))
        _write(out, "net.dump", dnet.dump(net))
    except OSError as e:
        return _fail(f"cannot write results: {e}")
    for row in rows[1:]:
        print(row)
    if criterion_trial(records, cfg.schedule.criterion) is None:
        return EXIT_MAX_TRIALS
    return EXIT_OK


# -- gps ----------------------------------------------------------------------


def _task_path(arg: str) -> Path:
    p = Path(arg)
    if not p.exists() and arg in BUILTINS:
        return builtin_path(arg)
    return p


def cmd_gps_solve(args) -> int:
    path = _task_path(args.task)
    try:
        task = load_task(path)
    except TaskSyntaxError as e:
        return _fail(e.format())
    except OSError as e:
        return _fail(f"{path}: {e}")
    try:
        budget = SearchBudget(max_depth=args.budget_depth, max_goals=args.budget_goals)
    except ValueError as e:
        return _fail(str(e))
    code = EXIT_OK
    try:
        trace = solve(task, budget, lookahead=args.lookahead == "on")
    except NoSolution as e:
        trace, code = e.trace, EXIT_NO_SOLUTION
    except BudgetExhausted as e:
        trace, code = e.trace, EXIT_BUDGET
    try:
        out = Path(args.out)
        _write(out, "trace.txt", trace.render_text())
        _write(out, "trace.json", trace.to_json())
    except OSError as e:
        return _fail(f"cannot write trace: {e}")
    if code == EXIT_OK:
        print("plan: [" + ", ".join(trace.plan_names) + "]")
    else:
        print(f"{trace.outcome}: goals={trace.stats['goals']}")
    return code


# -- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="epamgps", description="EPAM learner and GPS solver harness")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    f = sub.add_parser("features", help="write the letter feature table CSV")
    f.add_argument("--out", default="out")
    f.set_defaults(func=cmd_features)

    e = sub.add_parser("epam", help="paired-associate experiments")
    esub = e.add_subparsers(dest="epam_command", parser_class=_Parser, required=True)
    run = esub.add_parser("run", help="learn lists to criterion")
    run.add_argument("config", nargs="+")
    run.add_argument("--out", default="out")
    run.add_argument("--seed", type=int, default=None, help=f"default {DEFAULT_SEED}")
    run.add_argument("--jobs", type=int, default=1)
    run.set_defaults(func=cmd_epam_run)
    pr = esub.add_parser("probe", help="train, then probe without study")
    pr.add_argument("config")
    pr.add_argument("--probes", default="")
    pr.add_argument("--out", default="out")
    pr.add_argument("--seed", type=int, default=None)
    pr.set_defaults(func=cmd_epam_probe)

    g = sub.add_parser("gps", help="means-ends problem solving")
    gsub = g.add_subparsers(dest="gps_command", parser_class=_Parser, required=True)
    sv = gsub.add_parser("solve", help="solve a .task file or builtin")
    sv.add_argument("task", help=f"path to a .task file or one of {', '.join(BUILTINS)}")
    sv.add_argument("--out", default="out")
    defaults = SearchBudget()
    sv.add_argument("--budget-depth", type=int, default=defaults.max_depth)
    sv.add_argument("--budget-goals", type=int, default=defaults.max_goals)
    sv.add_argument("--lookahead", choices=("on", "off"), default="on")
    sv.set_defaults(func=cmd_gps_solve)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
