"""Experiment harness: core-count and schedulable-ratio sweeps.

Two studies, both over seeded synthetic task sets:

* ``sweep_cores``: for each (load, cs_ratio) point, how many cores each
  allocator needs (via ``min_cores``), plus the relative saving of the
  blocking-aware allocator over plain worst-fit.
* ``sweep_ratio``: fraction of task sets each allocator fits onto a fixed
  core budget, as one generation knob varies (cs_ratio, per-task utilization,
  core multiple, or resources per group).

Every trial generates one task set that all algorithms share, so summaries
are paired comparisons. Trials run in parallel if asked; records carry no
wall-clock data and are sorted before writing, so output files are
byte-identical whatever the worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

from .model import TaskSet
from .partition import ALGORITHMS, NotSchedulableWithinCap, allocate_brwfd, min_cores
from .taskgen import GenConfig, generate

Point = tuple[tuple[str, float | int], ...]

CS_RATIO_AXIS = "cs_ratio"
UTIL_AXIS = "util"
CORE_MULTIPLE_AXIS = "core_multiple"
RESOURCES_AXIS = "resources_per_group"
RATIO_AXES = (CS_RATIO_AXIS, UTIL_AXIS, CORE_MULTIPLE_AXIS, RESOURCES_AXIS)


@dataclass(frozen=True)
class SweepSpec:
    """Axis values and shared knobs for one sweep.

    ``loads`` and ``cs_ratios`` span the core-count study grid. For the
    ratio study exactly one of ``cs_ratios``, ``utils``, ``core_multiples``,
    ``resources_per_group`` acts as the axis; ``utils`` values pin every
    task's utilization (degenerate range), and ``core_multiples`` scale the
    core budget as ceil(multiple * load).
    """

    loads: tuple[float, ...] = (8.0,)
    cs_ratios: tuple[float, ...] = (0.12,)
    utils: tuple[float, ...] = ()
    core_multiples: tuple[float, ...] = ()
    resources_per_group: tuple[int, ...] = (5,)
    util_range: tuple[float, float] = (0.1, 0.15)
    cores: int | None = None
    trials: int = 100
    algorithms: tuple[str, ...] = ("brwfd", "wfd")
    seed: int = 0
    beta: float = 0.1
    gen_mode: str = "constrained"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}, expected one of {sorted(ALGORITHMS)}")
        if any(s <= 0 for s in self.loads):
            raise ValueError("loads must be positive")
        if any(c < 0 for c in self.cs_ratios):
            raise ValueError("cs_ratios must be >= 0")
        if any(not 0 < u <= 1 for u in self.utils):
            raise ValueError("utils must lie in (0, 1]")
        if any(m <= 0 for m in self.core_multiples):
            raise ValueError("core multiples must be positive")
        if any(r < 1 for r in self.resources_per_group):
            raise ValueError("resources per group must be >= 1")
        if self.cores is not None and self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ExperimentRecord:
    """One (point, trial, algorithm) outcome."""

    seed: int
    trial: int
    point: Point
    algorithm: str
    outcome: Mapping[str, object]

    def sort_key(self):
        return (self.point, self.trial, self.algorithm)

    def to_wire(self) -> dict:
        return {
            "seed": self.seed,
            "trial": self.trial,
            "point": {name: value for name, value in self.point},
            "algorithm": self.algorithm,
            "outcome": dict(self.outcome),
        }


@dataclass(frozen=True)
class SummaryRow:
    """One aggregated cell; ``algorithm`` is empty for paired metrics."""

    point: Point
    algorithm: str
    metric: str
    value: float | None
    n_trials: int
    n_failures: int


@dataclass(frozen=True)
class SweepResult:
    axes: tuple[str, ...]
    records: tuple[ExperimentRecord, ...]
    summary: tuple[SummaryRow, ...]
    meta: dict


def _default_cores(load: float) -> int:
    return 2 * math.ceil(load)


def _gen_config(spec: SweepSpec, load: float, cs_ratio: float,
                util_range: tuple[float, float], resources: int) -> GenConfig:
    return GenConfig(
        total_load=load,
        util_range=util_range,
        resources_per_group=resources,
        cs_ratio=cs_ratio,
        seed=spec.seed,
        mode=spec.gen_mode,
    )


def _cores_trial(args: tuple[SweepSpec, Point, int]) -> list[ExperimentRecord]:
    spec, point, trial = args
    values = dict(point)
    cfg = _gen_config(spec, values["load"], values["cs_ratio"],
                      spec.util_range, spec.resources_per_group[0])
    ts = generate(cfg, trial)
    records = []
    for name in spec.algorithms:
        try:
            cores = min_cores(ts, name, beta=spec.beta)
            outcome: dict[str, object] = {"cores_required": cores}
        except NotSchedulableWithinCap as exc:
            outcome = {"cores_required": None, "error": "not_schedulable_within_cap",
                       "cap": exc.cap}
        records.append(ExperimentRecord(spec.seed, trial, point, name, outcome))
    return records


def _ratio_trial(args: tuple[SweepSpec, str, Point, int]) -> list[ExperimentRecord]:
    spec, axis, point, trial = args
    value = dict(point)[axis]
    load = spec.loads[0]
    cs_ratio = spec.cs_ratios[0] if spec.cs_ratios else 0.12
    util_range = spec.util_range
    resources = spec.resources_per_group[0]
    if axis == CS_RATIO_AXIS:
        cs_ratio = float(value)
    elif axis == UTIL_AXIS:
        util_range = (float(value), float(value))
    elif axis == RESOURCES_AXIS:
        resources = int(value)
    if axis == CORE_MULTIPLE_AXIS:
        cores = math.ceil(value * load)
    else:
        cores = spec.cores if spec.cores is not None else _default_cores(load)
    cfg = _gen_config(spec, load, cs_ratio, util_range, resources)
    ts = generate(cfg, trial)
    records = []
    for name in spec.algorithms:
        if name == "brwfd":
            outcome_obj = allocate_brwfd(ts, cores, spec.beta)
        else:
            outcome_obj = ALGORITHMS[name](ts, cores)
        records.append(ExperimentRecord(
            spec.seed, trial, point, name,
            {"schedulable": outcome_obj.ok, "cores": cores},
        ))
    return records


def _run(worker, items: list, workers: int) -> list[ExperimentRecord]:
    if workers <= 1 or len(items) <= 1:
        batches = [worker(item) for item in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(items) // (workers * 8))
            batches = list(pool.map(worker, items, chunksize=chunk))
    records = [rec for batch in batches for rec in batch]
    records.sort(key=ExperimentRecord.sort_key)
    return records


def sweep_cores(spec: SweepSpec) -> SweepResult:
    """Minimum-cores study over the (load, cs_ratio) grid."""
    if len(spec.resources_per_group) != 1:
        raise ValueError("the cores sweep fixes resources_per_group to one value")
    if spec.utils or spec.core_multiples:
        raise ValueError("utils / core_multiples do not apply to the cores sweep")
    points: list[Point] = [
        (("load", load), ("cs_ratio", ratio))
        for load in spec.loads
        for ratio in spec.cs_ratios
    ]
    items = [(spec, point, trial) for point in points for trial in range(spec.trials)]
    records = _run(_cores_trial, items, spec.workers)
    summary = summarize_cores(records)
    meta = _meta(spec, kind="sweep_cores", axes=("load", "cs_ratio"))
    return SweepResult(("load", "cs_ratio"), tuple(records), tuple(summary), meta)


def sweep_ratio(spec: SweepSpec, axis: str) -> SweepResult:
    """Schedulable-ratio study along one generation axis at fixed cores."""
    if axis not in RATIO_AXES:
        raise ValueError(f"axis must be one of {RATIO_AXES}, got {axis!r}")
    if len(spec.loads) != 1:
        raise ValueError("ratio sweeps fix a single load")
    values: tuple = {
        CS_RATIO_AXIS: spec.cs_ratios,
        UTIL_AXIS: spec.utils,
        CORE_MULTIPLE_AXIS: spec.core_multiples,
        RESOURCES_AXIS: spec.resources_per_group,
    }[axis]
    if not values:
        raise ValueError(f"no values supplied for axis {axis!r}")
    if axis == CORE_MULTIPLE_AXIS and spec.cores is not None:
        raise ValueError("a fixed core count conflicts with the core-multiple axis")
    for name, field_values, limit in (
        (CS_RATIO_AXIS, spec.cs_ratios, 1),
        (UTIL_AXIS, spec.utils, 0),
        (CORE_MULTIPLE_AXIS, spec.core_multiples, 0),
        (RESOURCES_AXIS, spec.resources_per_group, 1),
    ):
        if name != axis and len(field_values) > limit:
            raise ValueError(f"{name} must stay fixed while sweeping {axis}")
    points: list[Point] = [((axis, value),) for value in values]
    items = [(spec, axis, point, trial) for point in points for trial in range(spec.trials)]
    records = _run(_ratio_trial, items, spec.workers)
    summary = summarize_ratio(records)
    meta = _meta(spec, kind="sweep_ratio", axes=(axis,))
    return SweepResult((axis,), tuple(records), tuple(summary), meta)


def _meta(spec: SweepSpec, kind: str, axes: tuple[str, ...]) -> dict:
    # Worker count deliberately left out: outputs must not depend on it.
    return {
        "kind": kind,
        "axes": list(axes),
        "seed": spec.seed,
        "trials": spec.trials,
        "algorithms": list(spec.algorithms),
        "beta": spec.beta,
        "gen_mode": spec.gen_mode,
        "loads": list(spec.loads),
        "cs_ratios": list(spec.cs_ratios),
        "utils": list(spec.utils),
        "core_multiples": list(spec.core_multiples),
        "resources_per_group": list(spec.resources_per_group),
        "util_range": list(spec.util_range),
        "cores": spec.cores,
        "notes": {
            "core_multiple": "cores = ceil(multiple * load); larger multiple means more cores",
            "reduction_pct": "(mean_wfd - mean_brwfd) / mean_wfd * 100 over trials where the algorithm succeeded",
        },
    }


def summarize_cores(records: Iterable[ExperimentRecord]) -> list[SummaryRow]:
    """Mean cores per (point, algorithm) and the paired reduction percentage.

    Trials that exhausted the search cap are excluded from means and counted
    as failures.
    """
    by_point: dict[Point, dict[str, list[int | None]]] = {}
    for rec in records:
        by_point.setdefault(rec.point, {}).setdefault(rec.algorithm, []).append(
            rec.outcome.get("cores_required")  # type: ignore[arg-type]
        )
    rows: list[SummaryRow] = []
    for point in sorted(by_point):
        means: dict[str, float] = {}
        failures_total = 0
        for algorithm in sorted(by_point[point]):
            values = by_point[point][algorithm]
            good = [v for v in values if v is not None]
            failures = len(values) - len(good)
            failures_total += failures
            mean = sum(good) / len(good) if good else None
            if mean is not None:
                means[algorithm] = mean
            rows.append(SummaryRow(point, algorithm, "mean_cores", mean, len(values), failures))
        if "brwfd" in means and "wfd" in means and means["wfd"] > 0:
            reduction = (means["wfd"] - means["brwfd"]) / means["wfd"] * 100.0
            n = len(by_point[point]["wfd"])
            rows.append(SummaryRow(point, "", "reduction_pct", reduction, n, failures_total))
    return rows


def summarize_ratio(records: Iterable[ExperimentRecord]) -> list[SummaryRow]:
    """Schedulable fraction per (point, algorithm)."""
    by_point: dict[Point, dict[str, list[bool]]] = {}
    for rec in records:
        by_point.setdefault(rec.point, {}).setdefault(rec.algorithm, []).append(
            bool(rec.outcome.get("schedulable"))
        )
    rows: list[SummaryRow] = []
    for point in sorted(by_point):
        for algorithm in sorted(by_point[point]):
            flags = by_point[point][algorithm]
            ratio = sum(flags) / len(flags)
            rows.append(SummaryRow(point, algorithm, "schedulable_ratio", ratio,
                                   len(flags), len(flags) - sum(flags)))
    return rows


def write_records(records: Iterable[ExperimentRecord], path) -> None:
    """Raw results, one JSON object per line, stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_wire(), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def write_summary(rows: Iterable[SummaryRow], axes: tuple[str, ...], path) -> None:
    """Summary CSV: one axis column per point dimension, then the metric cell."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*axes, "algorithm", "metric", "value", "n_trials", "n_failures"])
        for row in rows:
            values = dict(row.point)
            cell = "" if row.value is None else repr(row.value)
            writer.writerow([
                *(repr(values[a]) if isinstance(values[a], float) else values[a] for a in axes),
                row.algorithm, row.metric, cell, row.n_trials, row.n_failures,
            ])


def write_meta(meta: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_outputs(result: SweepResult, outdir) -> dict[str, Path]:
    """Write records.jsonl, summary.csv, and meta.json into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "records": out / "records.jsonl",
        "summary": out / "summary.csv",
        "meta": out / "meta.json",
    }
    write_records(result.records, paths["records"])
    write_summary(result.summary, result.axes, paths["summary"])
    write_meta(result.meta, paths["meta"])
    return paths
