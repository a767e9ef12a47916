"""Sweep harness: pairing, determinism across workers, summaries, writers."""

from __future__ import annotations

import csv
import json
import math

import pytest

from mpcpsched import (
    ExperimentRecord,
    SweepSpec,
    summarize_cores,
    summarize_ratio,
    sweep_cores,
    sweep_ratio,
    write_outputs,
)

SMALL = dict(loads=(1.0,), cs_ratios=(0.08,), trials=3, seed=5)


# --- SweepSpec validation -----------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(trials=0),
        dict(algorithms=()),
        dict(algorithms=("brwfd", "nope")),
        dict(loads=(0.0,)),
        dict(cs_ratios=(-0.1,)),
        dict(utils=(1.5,)),
        dict(core_multiples=(0.0,)),
        dict(resources_per_group=(0,)),
        dict(cores=0),
        dict(workers=0),
    ],
)
def test_spec_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_cores_sweep_rejects_ratio_only_fields():
    with pytest.raises(ValueError):
        sweep_cores(SweepSpec(utils=(0.1,), **SMALL))
    with pytest.raises(ValueError):
        sweep_cores(SweepSpec(resources_per_group=(1, 5), **SMALL))


def test_ratio_sweep_rejects_ambiguous_axes():
    with pytest.raises(ValueError, match="axis"):
        sweep_ratio(SweepSpec(**SMALL), "bogus")
    with pytest.raises(ValueError, match="no values"):
        sweep_ratio(SweepSpec(**SMALL), "util")
    # A non-axis field with several values has no single fixed setting.
    with pytest.raises(ValueError, match="stay fixed"):
        sweep_ratio(SweepSpec(loads=(1.0,), cs_ratios=(0.0, 0.1), utils=(0.2,), trials=1), "util")
    with pytest.raises(ValueError, match="conflicts"):
        sweep_ratio(
            SweepSpec(loads=(1.0,), cs_ratios=(0.08,), core_multiples=(2.0,), cores=4, trials=1),
            "core_multiple",
        )
    with pytest.raises(ValueError, match="single load"):
        sweep_ratio(SweepSpec(loads=(1.0, 2.0), utils=(0.2,), trials=1), "util")


# --- cores sweep -------------------------------------------------------------


def test_cores_sweep_record_grid():
    result = sweep_cores(SweepSpec(**SMALL))
    assert result.axes == ("load", "cs_ratio")
    point = (("load", 1.0), ("cs_ratio", 0.08))
    assert len(result.records) == 3 * 2
    assert [r.sort_key() for r in result.records] == sorted(
        r.sort_key() for r in result.records
    )
    for rec in result.records:
        assert rec.point == point
        assert rec.seed == 5
        cores = rec.outcome["cores_required"]
        assert isinstance(cores, int) and cores >= 1
    # Every trial carries one record per algorithm: paired by construction.
    for trial in range(3):
        algos = sorted(r.algorithm for r in result.records if r.trial == trial)
        assert algos == ["brwfd", "wfd"]


def test_cores_sweep_summary_rows():
    result = sweep_cores(SweepSpec(**SMALL))
    metrics = {(row.algorithm, row.metric) for row in result.summary}
    assert ("brwfd", "mean_cores") in metrics
    assert ("wfd", "mean_cores") in metrics
    assert ("", "reduction_pct") in metrics
    for row in result.summary:
        if row.metric == "mean_cores":
            assert row.n_trials == 3 and row.n_failures == 0


def test_cores_sweep_identical_across_worker_counts(tmp_path):
    spec1 = SweepSpec(workers=1, **SMALL)
    spec2 = SweepSpec(workers=2, **SMALL)
    d1, d2 = tmp_path / "w1", tmp_path / "w2"
    write_outputs(sweep_cores(spec1), d1)
    write_outputs(sweep_cores(spec2), d2)
    for name in ("records.jsonl", "summary.csv", "meta.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_meta_carries_no_environment_detail():
    result = sweep_cores(SweepSpec(**SMALL))
    assert "workers" not in result.meta
    assert result.meta["kind"] == "sweep_cores"
    assert result.meta["seed"] == 5
    wire = result.records[0].to_wire()
    assert set(wire) == {"seed", "trial", "point", "algorithm", "outcome"}


# --- ratio sweeps ------------------------------------------------------------


def test_ratio_sweep_cs_axis():
    spec = SweepSpec(loads=(1.0,), cs_ratios=(0.0, 0.12), cores=2, trials=2, seed=6)
    result = sweep_ratio(spec, "cs_ratio")
    assert result.axes == ("cs_ratio",)
    assert len(result.records) == 2 * 2 * 2
    assert all(rec.outcome["cores"] == 2 for rec in result.records)
    for row in result.summary:
        assert row.metric == "schedulable_ratio"
        assert 0.0 <= row.value <= 1.0
        assert row.n_trials == 2


def test_ratio_sweep_util_axis_pins_every_task():
    spec = SweepSpec(loads=(1.0,), cs_ratios=(0.08,), utils=(0.2,), cores=2, trials=2, seed=7)
    result = sweep_ratio(spec, "util")
    assert result.records[0].point == (("util", 0.2),)
    assert len(result.records) == 4


def test_ratio_sweep_core_multiple_axis_sets_budget():
    spec = SweepSpec(loads=(1.0,), cs_ratios=(0.08,), core_multiples=(1.0, 3.0),
                     trials=2, seed=8)
    result = sweep_ratio(spec, "core_multiple")
    for rec in result.records:
        mult = dict(rec.point)["core_multiple"]
        assert rec.outcome["cores"] == math.ceil(mult * 1.0)


def test_ratio_sweep_resources_axis():
    spec = SweepSpec(loads=(1.0,), cs_ratios=(0.08,), resources_per_group=(1, 5),
                     cores=2, trials=2, seed=9)
    result = sweep_ratio(spec, "resources_per_group")
    points = {rec.point for rec in result.records}
    assert points == {(("resources_per_group", 1),), (("resources_per_group", 5),)}


# --- summaries from records --------------------------------------------------


def _rec(point, trial, algorithm, outcome):
    return ExperimentRecord(0, trial, point, algorithm, outcome)


def test_reduction_percentage_math():
    point = (("load", 2.0), ("cs_ratio", 0.1))
    records = [
        _rec(point, 0, "brwfd", {"cores_required": 2}),
        _rec(point, 0, "wfd", {"cores_required": 4}),
        _rec(point, 1, "brwfd", {"cores_required": 4}),
        _rec(point, 1, "wfd", {"cores_required": 4}),
    ]
    rows = summarize_cores(records)
    by = {(r.algorithm, r.metric): r for r in rows}
    assert by[("brwfd", "mean_cores")].value == 3.0
    assert by[("wfd", "mean_cores")].value == 4.0
    assert by[("", "reduction_pct")].value == pytest.approx(25.0)


def test_cores_summary_excludes_capped_trials():
    point = (("load", 2.0), ("cs_ratio", 0.1))
    records = [
        _rec(point, 0, "brwfd", {"cores_required": 2}),
        _rec(point, 1, "brwfd", {"cores_required": None, "error": "not_schedulable_within_cap"}),
    ]
    rows = summarize_cores(records)
    (row,) = [r for r in rows if r.metric == "mean_cores"]
    assert row.value == 2.0
    assert row.n_trials == 2 and row.n_failures == 1


def test_ratio_summary_counts_failures():
    point = (("util", 0.2),)
    records = [
        _rec(point, 0, "wfd", {"schedulable": True, "cores": 2}),
        _rec(point, 1, "wfd", {"schedulable": False, "cores": 2}),
        _rec(point, 2, "wfd", {"schedulable": True, "cores": 2}),
    ]
    (row,) = summarize_ratio(records)
    assert row.value == pytest.approx(2 / 3)
    assert row.n_trials == 3 and row.n_failures == 1


def test_summary_recomputable_from_wire_records(tmp_path):
    result = sweep_cores(SweepSpec(**SMALL))
    paths = write_outputs(result, tmp_path)
    rebuilt = []
    with open(paths["records"], encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            # Wire JSON sorts keys; the meta axes give the canonical order.
            point = tuple((a, obj["point"][a]) for a in result.meta["axes"])
            rebuilt.append(
                ExperimentRecord(obj["seed"], obj["trial"], point, obj["algorithm"], obj["outcome"])
            )
    assert summarize_cores(rebuilt) == list(result.summary)


# --- file formats ------------------------------------------------------------


def test_written_files_round_trip(tmp_path):
    result = sweep_cores(SweepSpec(**SMALL))
    paths = write_outputs(result, tmp_path / "out")
    lines = (tmp_path / "out" / "records.jsonl").read_text().splitlines()
    assert len(lines) == len(result.records)
    assert all(json.loads(line) for line in lines)

    with open(paths["summary"], newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["load", "cs_ratio", "algorithm", "metric", "value",
                       "n_trials", "n_failures"]
    data = rows[1:]
    assert len(data) == len(result.summary)
    # Numeric cells survive parsing; axis cells reproduce the point exactly.
    assert float(data[0][0]) == 1.0 and float(data[0][1]) == 0.08

    meta = json.loads((tmp_path / "out" / "meta.json").read_text())
    assert meta == result.meta
