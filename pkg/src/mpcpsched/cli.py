"""Command-line front end.

Subcommands:

* ``gen``          write synthetic task sets as JSON
* ``analyze``      per-task blocking / response-time report for a task set
* ``partition``    run one or both allocators at a fixed core count
* ``sweep-cores``  minimum-cores study over a (load, cs_ratio) grid
* ``sweep-ratio``  schedulable-ratio study along one generation axis

Exit codes: 0 success, 1 usage error, 2 invalid input data or configuration.
Report and sweep outputs are delimited files (JSON / JSONL / CSV); the same
directories also receive rendered PNG figures unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .blocking import BlockingAnalysis
from .experiments import (
    RATIO_AXES,
    SweepSpec,
    sweep_cores,
    sweep_ratio,
    write_outputs,
)
from .model import (
    Allocation,
    TaskSet,
    TaskSetError,
    load_taskset,
    taskset_to_dict,
)
from .partition import ALGORITHMS, PartitionOutcome, allocate_brwfd, pbu_table
from .rta import is_schedulable
from .taskgen import CONSTRAINED, GEN_MODES, ConfigError, GenConfig, InfeasibleError, generate

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this tool reserves 2 for bad input data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _util_range(text: str) -> tuple[float, float]:
    parts = _float_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi got {text!r}")
    return (parts[0], parts[1])


def _algorithms(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    for name in names:
        if name not in ALGORITHMS:
            raise argparse.ArgumentTypeError(
                f"unknown algorithm {name!r}; choose from {', '.join(sorted(ALGORITHMS))}"
            )
    if not names:
        raise argparse.ArgumentTypeError("at least one algorithm is required")
    return names


def _add_gen_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--load", type=float, default=8.0, help="total system load (default 8)")
    sub.add_argument("--cs-ratio", type=float, default=0.12,
                     help="critical-section length as a fraction of wcet (default 0.12)")
    sub.add_argument("--util-range", type=_util_range, default=(0.1, 0.15), metavar="LO,HI",
                     help="per-task utilization interval (default 0.1,0.15)")
    sub.add_argument("--util", type=float, default=None,
                     help="fix every task's utilization to this value (overrides --util-range)")
    sub.add_argument("--resources-per-group", type=int, default=5,
                     help="shared resources per task group (default 5)")
    sub.add_argument("--gen-mode", choices=GEN_MODES, default=CONSTRAINED,
                     help="utilization draw: range-constrained (default) or classic uunifast")
    sub.add_argument("--seed", type=int, default=0, help="64-bit root seed (default 0)")


def _gen_config_from_args(args) -> GenConfig:
    util_range = (args.util, args.util) if args.util is not None else args.util_range
    return GenConfig(
        total_load=args.load,
        util_range=util_range,
        resources_per_group=args.resources_per_group,
        cs_ratio=args.cs_ratio,
        seed=args.seed,
        mode=args.gen_mode,
    )


def _print_table(headers: list[str], rows: list[list], stream=None) -> None:
    stream = stream or sys.stdout
    text_rows = [[_cell(v) for v in row] for row in rows]
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in text_rows)) if text_rows else len(headers[i])
        for i in range(len(headers))
    ]
    stream.write("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip() + "\n")
    for row in text_rows:
        stream.write("  ".join(row[i].ljust(widths[i]) for i in range(len(row))).rstrip() + "\n")


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


# ---------------------------------------------------------------------------
# gen


def _cmd_gen(args) -> int:
    cfg = _gen_config_from_args(args)
    sets = [generate(cfg, trial) for trial in range(args.trials)]
    if args.out is None:
        if args.trials == 1:
            json.dump(taskset_to_dict(sets[0]), sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
        else:
            for ts in sets:
                sys.stdout.write(json.dumps(taskset_to_dict(ts), sort_keys=True,
                                            separators=(",", ":")) + "\n")
        return 0
    out = Path(args.out)
    if out.suffix == ".jsonl":
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            for ts in sets:
                fh.write(json.dumps(taskset_to_dict(ts), sort_keys=True,
                                    separators=(",", ":")) + "\n")
    elif out.suffix == ".json":
        if args.trials != 1:
            raise ConfigError("a single .json output holds one task set; "
                              "use --trials 1, a .jsonl file, or a directory")
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(taskset_to_dict(sets[0]), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        out.mkdir(parents=True, exist_ok=True)
        for trial, ts in enumerate(sets):
            with open(out / f"taskset_{trial:04d}.json", "w", encoding="utf-8") as fh:
                json.dump(taskset_to_dict(ts), fh, indent=2, sort_keys=True)
                fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# analyze


def _load_allocation(ts: TaskSet, path) -> Allocation:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TaskSetError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "core_count" not in obj or "assignment" not in obj:
        raise TaskSetError(f"{path}: expected an object with core_count and assignment")
    raw = obj["assignment"]
    if not isinstance(raw, dict):
        raise TaskSetError(f"{path}: assignment must map task ids to cores")
    try:
        assignment = {int(k): int(v) for k, v in raw.items()}
        return Allocation(ts, int(obj["core_count"]), assignment)
    except (TypeError, ValueError) as exc:
        raise TaskSetError(f"{path}: {exc}") from None


def _analysis_report(ts: TaskSet, alloc: Allocation, beta: float) -> dict:
    table = pbu_table(ts, beta)
    verdict = is_schedulable(ts, alloc)
    context = BlockingAnalysis(ts, alloc)
    rows = []
    for task_id in alloc.assigned_ids:
        task = ts.task(task_id)
        entry = table[task_id]
        analysis = verdict.per_task[task_id]
        rows.append({
            "id": task_id,
            "core": alloc.core_of(task_id),
            "priority": task.priority,
            "utilization": task.utilization,
            "pgb_low": entry.pgb_low,
            "pgb_high": entry.pgb_high,
            "pbu": entry.pbu,
            "n_global_sections": context.n_global_sections(task_id),
            "blocking": analysis.blocking.to_dict(),
            "wcrt_ms": analysis.wcrt,
            "deadline_ms": task.deadline,
            "schedulable": analysis.schedulable,
        })
    return {
        "schedulable": verdict.schedulable,
        "first_failure": verdict.first_failure,
        "core_count": alloc.core_count,
        "assignment": {str(i): alloc.core_of(i) for i in alloc.assigned_ids},
        "beta": beta,
        "tasks": rows,
    }


_REPORT_COLUMNS = [
    ("id", "id"), ("core", "core"), ("priority", "prio"), ("utilization", "util"),
    ("pbu", "pbu"), ("wcrt_ms", "wcrt"), ("deadline_ms", "deadline"),
    ("schedulable", "ok"),
]
_BLOCKING_COLUMNS = ["dlb", "dgb_low", "dgb_high", "mli", "total"]


def _report_csv_rows(report: dict) -> tuple[list[str], list[list]]:
    headers = [name for name, _ in _REPORT_COLUMNS[:-1]] + _BLOCKING_COLUMNS + ["schedulable"]
    rows = []
    for task in report["tasks"]:
        row = [task[name] for name, _ in _REPORT_COLUMNS[:-1]]
        row += [task["blocking"][key] for key in _BLOCKING_COLUMNS]
        row.append(task["schedulable"])
        rows.append(row)
    return headers, rows


def _cmd_analyze(args) -> int:
    ts = load_taskset(args.taskset)
    if args.alloc is not None:
        alloc = _load_allocation(ts, args.alloc)
    else:
        cores = args.cores if args.cores is not None else 2 * math.ceil(ts.total_utilization)
        outcome = allocate_brwfd(ts, cores, args.beta)
        if outcome.allocation is not None:
            alloc = outcome.allocation
        else:
            # Failed runs still leave the committed prefix in the trace.
            alloc = Allocation(ts, cores, {e.task_id: e.chosen for e in outcome.trace})
    report = _analysis_report(ts, alloc, args.beta)

    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    elif args.format == "csv":
        import csv as _csv

        headers, rows = _report_csv_rows(report)
        writer = _csv.writer(sys.stdout)
        writer.writerow(headers)
        writer.writerows(rows)
    else:
        table_rows = []
        for task in report["tasks"]:
            table_rows.append(
                [task[name] for name, _ in _REPORT_COLUMNS[:-1]]
                + [task["blocking"]["total"], "yes" if task["schedulable"] else "NO"]
            )
        _print_table([label for _, label in _REPORT_COLUMNS[:-1]] + ["blocking", "ok"],
                     table_rows)
        verdict = "schedulable" if report["schedulable"] else (
            f"unschedulable (first failure: task {report['first_failure']})")
        print(f"verdict: {verdict}")

    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.format == "csv":
            import csv as _csv

            headers, rows = _report_csv_rows(report)
            with open(outdir / "report.csv", "w", encoding="utf-8", newline="") as fh:
                writer = _csv.writer(fh)
                writer.writerow(headers)
                writer.writerows(rows)
        else:
            with open(outdir / "report.json", "w", encoding="utf-8") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
                fh.write("\n")
        if not args.no_figures and report["tasks"]:
            from .figures import render_analysis_figure

            render_analysis_figure(report, outdir)
    return 0


# ---------------------------------------------------------------------------
# partition


def _print_partition(name: str, outcome: PartitionOutcome) -> None:
    print(f"algorithm: {name}")
    if outcome.ok:
        print("verdict: schedulable")
    else:
        detail = "" if outcome.failure.task_id is None else f" (task {outcome.failure.task_id})"
        print(f"verdict: failed, {outcome.failure.kind}{detail}")
    rows = []
    alloc = outcome.allocation
    for core in range(len(outcome.core_utilization)):
        members = "-"
        if alloc is not None:
            members = ",".join(str(i) for i in alloc.tasks_on(core)) or "-"
        rows.append([core, members, outcome.core_utilization[core],
                     outcome.core_blocking_load[core]])
    _print_table(["core", "tasks", "utilization", "blocking_load"], rows)


def _cmd_partition(args) -> int:
    ts = load_taskset(args.taskset)
    results = {}
    for name in args.algorithms:
        if name == "brwfd":
            results[name] = allocate_brwfd(ts, args.cores, args.beta)
        else:
            results[name] = ALGORITHMS[name](ts, args.cores)
    if args.format == "json":
        print(json.dumps({name: outcome.to_dict() for name, outcome in results.items()},
                         indent=2, sort_keys=True))
    else:
        for idx, (name, outcome) in enumerate(results.items()):
            if idx:
                print()
            _print_partition(name, outcome)
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, outcome in results.items():
            with open(outdir / f"partition_{name}.json", "w", encoding="utf-8") as fh:
                json.dump(outcome.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# sweeps


def _add_sweep_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--trials", type=int, default=100,
                     help="task sets per point (default 100; larger tightens estimates)")
    sub.add_argument("--algorithms", type=_algorithms, default=("brwfd", "wfd"),
                     metavar="A[,B]", help="allocators to run (default brwfd,wfd)")
    sub.add_argument("--beta", type=float, default=0.1,
                     help="blocking weight in the placement utilization (default 0.1)")
    sub.add_argument("--seed", type=int, default=0, help="64-bit root seed (default 0)")
    sub.add_argument("--util-range", type=_util_range, default=(0.1, 0.15), metavar="LO,HI")
    sub.add_argument("--gen-mode", choices=GEN_MODES, default=CONSTRAINED)
    sub.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes (output is identical for any value)")
    sub.add_argument("--out", required=True,
                     help="output directory for records.jsonl, summary.csv, meta.json, figures")
    sub.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def _print_summary(result) -> None:
    rows = [
        [*(dict(row.point)[axis] for axis in result.axes), row.algorithm or "-",
         row.metric, row.value, row.n_trials, row.n_failures]
        for row in result.summary
    ]
    _print_table([*result.axes, "algorithm", "metric", "value", "trials", "failures"], rows)


def _cmd_sweep_cores(args) -> int:
    spec = SweepSpec(
        loads=tuple(args.load),
        cs_ratios=tuple(args.cs_ratio),
        resources_per_group=(args.resources_per_group,),
        util_range=args.util_range,
        trials=args.trials,
        algorithms=args.algorithms,
        seed=args.seed,
        beta=args.beta,
        gen_mode=args.gen_mode,
        workers=args.workers,
    )
    result = sweep_cores(spec)
    paths = write_outputs(result, args.out)
    if not args.no_figures:
        from .figures import render_cores_figures

        render_cores_figures(result.summary, args.out)
    _print_summary(result)
    print(f"records: {paths['records']}")
    print(f"summary: {paths['summary']}")
    return 0


def _cmd_sweep_ratio(args, parser: argparse.ArgumentParser) -> int:
    axis_flags = {
        "cs_ratio": args.cs_ratio,
        "util": args.util,
        "core_multiple": args.core_multiple,
        "resources_per_group": args.resources_per_group,
    }
    provided = [name for name, values in axis_flags.items() if values is not None]
    if len(provided) != 1:
        parser.error("provide exactly one axis: --cs-ratio, --util, --core-multiple, "
                     "or --resources-per-group")
    axis = provided[0]
    if axis == "core_multiple" and args.cores is not None:
        parser.error("--cores conflicts with the --core-multiple axis")
    spec = SweepSpec(
        loads=(args.load,),
        cs_ratios=axis_flags["cs_ratio"] if axis == "cs_ratio" else (args.fixed_cs_ratio,),
        utils=axis_flags["util"] if axis == "util" else (),
        core_multiples=axis_flags["core_multiple"] if axis == "core_multiple" else (),
        resources_per_group=(axis_flags["resources_per_group"]
                             if axis == "resources_per_group" else (5,)),
        util_range=args.util_range,
        cores=args.cores,
        trials=args.trials,
        algorithms=args.algorithms,
        seed=args.seed,
        beta=args.beta,
        gen_mode=args.gen_mode,
        workers=args.workers,
    )
    result = sweep_ratio(spec, axis)
    paths = write_outputs(result, args.out)
    if not args.no_figures:
        from .figures import render_ratio_figure

        render_ratio_figure(result.summary, axis, args.out)
    _print_summary(result)
    print(f"records: {paths['records']}")
    print(f"summary: {paths['summary']}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="mpcpsched",
                     description="Blocking-aware schedulability analysis and task "
                                 "partitioning for multicore systems with shared resources.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate synthetic task sets")
    _add_gen_flags(gen)
    gen.add_argument("--trials", type=int, default=1, help="number of task sets (default 1)")
    gen.add_argument("--out", default=None,
                     help="output: .json file (one set), .jsonl file, or a directory")
    gen.set_defaults(func=_cmd_gen)

    analyze = sub.add_parser("analyze", help="blocking and response-time report")
    analyze.add_argument("taskset", help="task-set JSON file")
    analyze.add_argument("--alloc", default=None,
                         help="allocation JSON (core_count + assignment); default: "
                              "run the blocking-aware allocator")
    analyze.add_argument("--cores", type=int, default=None,
                         help="core count for the fresh allocation (default 2*ceil(load))")
    analyze.add_argument("--beta", type=float, default=0.1)
    analyze.add_argument("--format", choices=("table", "json", "csv"), default="table")
    analyze.add_argument("--out", default=None, help="directory for the report and figure")
    analyze.add_argument("--no-figures", action="store_true")
    analyze.set_defaults(func=_cmd_analyze)

    part = sub.add_parser("partition", help="run the allocators at a fixed core count")
    part.add_argument("taskset", help="task-set JSON file")
    part.add_argument("--cores", type=int, required=True)
    part.add_argument("--algorithms", type=_algorithms, default=("brwfd",), metavar="A[,B]")
    part.add_argument("--beta", type=float, default=0.1)
    part.add_argument("--format", choices=("table", "json"), default="table")
    part.add_argument("--out", default=None, help="directory for outcome JSON files")
    part.set_defaults(func=_cmd_partition)

    cores = sub.add_parser("sweep-cores", help="minimum-cores study (grid of load x cs_ratio)")
    cores.add_argument("--load", type=_float_list, default=(8.0,), metavar="S[,S...]")
    cores.add_argument("--cs-ratio", type=_float_list, default=(0.12,), metavar="C[,C...]")
    cores.add_argument("--resources-per-group", type=int, default=5)
    _add_sweep_flags(cores)
    cores.set_defaults(func=_cmd_sweep_cores)

    ratio = sub.add_parser("sweep-ratio", help="schedulable-ratio study along one axis")
    ratio.add_argument("--load", type=float, default=8.0)
    ratio.add_argument("--cs-ratio", type=_float_list, default=None, metavar="C[,C...]",
                       help="sweep the critical-section ratio")
    ratio.add_argument("--util", type=_float_list, default=None, metavar="U[,U...]",
                       help="sweep a fixed per-task utilization")
    ratio.add_argument("--core-multiple", type=_float_list, default=None, metavar="M[,M...]",
                       help="sweep the core budget as ceil(multiple*load)")
    ratio.add_argument("--resources-per-group", type=_int_list, default=None,
                       metavar="R[,R...]", help="sweep the group's resource count")
    ratio.add_argument("--fixed-cs-ratio", type=float, default=0.12,
                       help="cs_ratio used when it is not the axis (default 0.12)")
    ratio.add_argument("--cores", type=int, default=None,
                       help="fixed core budget (default 2*ceil(load); "
                            "not valid with --core-multiple)")
    _add_sweep_flags(ratio)
    ratio.set_defaults(func=lambda args, _p=ratio: _cmd_sweep_ratio(args, _p))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TaskSetError, ConfigError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
