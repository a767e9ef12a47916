"""Response-time iteration: hand-traced fixed points and a classical oracle."""

from __future__ import annotations

import math

import pytest

from mpcpsched import (
    Allocation,
    DeadlineMiss,
    Task,
    TaskSet,
    is_schedulable,
    wcrt,
)
from mpcpsched.blocking import BlockingAnalysis
from mpcpsched.rng import Xoshiro256StarStar
from mpcpsched.rta import _fixed_point

from conftest import random_taskset


def test_f1_response_times(f1, f1_alloc):
    # Hand iteration: t0 waits 0.5 remotely then runs (1.5); t1 absorbs one
    # job of t0 (2 + 1 = 3, stable); t2 adds its 1.0 global blocking (4.0).
    assert wcrt(f1, f1_alloc, 0) == 1.5
    assert wcrt(f1, f1_alloc, 1) == 3.0
    assert wcrt(f1, f1_alloc, 2) == 4.0

    res = is_schedulable(f1, f1_alloc)
    assert res.schedulable and res.first_failure is None
    assert sorted(res.per_task) == [0, 1, 2]
    assert [res.per_task[i].wcrt for i in (0, 1, 2)] == [1.5, 3.0, 4.0]


def test_sole_task_runs_in_its_wcet():
    ts = TaskSet((Task(0, 3.0, 7.0, 1),), 0)
    al = Allocation(ts, 1, {0: 0})
    assert wcrt(ts, al, 0) == 3.0


def test_two_task_interference_by_hand():
    # Low task: 2 + ceil(2/4)*1 = 3, then 2 + ceil(3/4)*1 = 3 -> stable.
    ts = TaskSet((Task(0, 1, 4, 2), Task(1, 2, 10, 1)), 0)
    al = Allocation(ts, 1, {0: 0, 1: 0})
    assert wcrt(ts, al, 0) == 1.0
    assert wcrt(ts, al, 1) == 3.0


def test_deadline_miss_reports_first_crossing_iterate():
    ts = TaskSet((Task(0, 1.0, 1.0, 2), Task(1, 1.0, 1.0, 1)), 0)
    al = Allocation(ts, 1, {0: 0, 1: 0})
    with pytest.raises(DeadlineMiss) as exc:
        wcrt(ts, al, 1)
    assert exc.value.task_id == 1
    assert exc.value.iterate == 2.0

    res = is_schedulable(ts, al)
    assert not res.schedulable
    assert res.first_failure == 1
    assert res.per_task[1].wcrt == 2.0 and not res.per_task[1].schedulable
    assert res.per_task[0].schedulable


def test_first_failure_is_lowest_failing_id():
    # t2 (highest priority) fits; both lower tasks overflow behind it.
    ts = TaskSet(
        (Task(0, 0.3, 2.0, 1), Task(1, 0.6, 2.0, 2), Task(2, 1.5, 2.0, 3)),
        0,
    )
    al = Allocation(ts, 1, {0: 0, 1: 0, 2: 0})
    res = is_schedulable(ts, al)
    assert not res.schedulable
    assert res.first_failure == 0
    assert not res.per_task[0].schedulable
    assert not res.per_task[1].schedulable
    assert res.per_task[2].schedulable and res.per_task[2].wcrt == 1.5


def test_exactly_at_deadline_is_schedulable():
    ts = TaskSet((Task(0, 1.0, 2.0, 2), Task(1, 1.0, 2.0, 1)), 0)
    al = Allocation(ts, 1, {0: 0, 1: 0})
    assert wcrt(ts, al, 1) == 2.0
    assert is_schedulable(ts, al).schedulable


def test_empty_and_partial_allocations(f1):
    res = is_schedulable(f1, Allocation(f1, 2, {}))
    assert res.schedulable and res.per_task == {}

    # Only the low task placed: the unassigned high task must not interfere.
    ts = TaskSet((Task(0, 1, 4, 2), Task(1, 2, 10, 1)), 0)
    partial = Allocation(ts, 1, {1: 0})
    res = is_schedulable(ts, partial)
    assert list(res.per_task) == [1]
    assert res.per_task[1].wcrt == 2.0


def test_wcrt_at_least_wcet_plus_blocking():
    rng = Xoshiro256StarStar(701)
    for _ in range(20):
        ts = random_taskset(rng, rng.randint(2, 8), 2, max_sections=2)
        al = Allocation(ts, 2, {t.id: t.id % 2 for t in ts.tasks})
        res = is_schedulable(ts, al)
        for i, ta in res.per_task.items():
            floor = ts.task(i).wcet + ta.blocking.total
            assert ta.wcrt >= floor - 1e-12


def test_iteration_count_bounded():
    rng = Xoshiro256StarStar(702)
    for _ in range(25):
        ts = random_taskset(rng, rng.randint(1, 8), 2, max_sections=1)
        al = Allocation(ts, 2, {t.id: t.id % 2 for t in ts.tasks})
        analysis = BlockingAnalysis(ts, al)
        for t in ts.tasks:
            hp_periods = [
                ts.task(j).period
                for j in al.tasks_on(al.core_of(t.id))
                if ts.task(j).priority > t.priority
            ]
            try:
                _, steps = _fixed_point(analysis, t.id)
            except DeadlineMiss:
                continue
            if hp_periods:
                assert steps <= math.ceil(t.deadline / min(hp_periods)) + 2
            else:
                assert steps <= 2


# --- classical single-core oracle -------------------------------------------


def _classical_rta(ts: TaskSet, task_id: int):
    """Independent textbook recursion R = C + sum(ceil(R/T_j) C_j).

    Interference is accumulated in ascending task-id order; with plain float
    addition that pins the rounding and makes bit-exact comparison fair.
    Returns ("ok", R) or ("miss", first iterate past the deadline).
    """
    me = ts.task(task_id)
    hp = [t for t in ts.tasks if t.priority > me.priority]
    r = me.wcet
    while True:
        total = me.wcet
        for other in hp:
            total += math.ceil(r / other.period) * other.wcet
        if total > me.deadline:
            return ("miss", total)
        if total == r:
            return ("ok", r)
        r = total


def test_matches_classical_rta_without_resources():
    rng = Xoshiro256StarStar(703)
    misses = 0
    for _ in range(200):
        n = rng.randint(1, 10)
        ts = random_taskset(rng, n, 0, max_sections=0, u_lo=0.05, u_hi=min(0.9, 1.6 / n))
        al = Allocation(ts, 1, {t.id: 0 for t in ts.tasks})
        for t in ts.tasks:
            expected = _classical_rta(ts, t.id)
            try:
                got = ("ok", wcrt(ts, al, t.id))
            except DeadlineMiss as miss:
                got = ("miss", miss.iterate)
                misses += 1
            assert got == expected  # bit-exact, no tolerance
    assert misses > 0  # the sample must exercise both verdicts


def test_removing_a_task_never_hurts_the_rest():
    rng = Xoshiro256StarStar(704)
    checked = 0
    for _ in range(30):
        n = rng.randint(2, 8)
        ts = random_taskset(rng, n, 0, max_sections=0, u_lo=0.05, u_hi=0.8 / n)
        al = Allocation(ts, 1, {t.id: 0 for t in ts.tasks})
        base = is_schedulable(ts, al)
        if not base.schedulable:
            continue
        drop = rng.randrange(n)
        kept = [t for t in ts.tasks if t.id != drop]
        ranks = {t.id: r for r, t in enumerate(sorted(kept, key=lambda t: t.priority))}
        smaller = TaskSet(
            tuple(
                Task(new_id, t.wcet, t.period, ranks[t.id] + 1, t.sections)
                for new_id, t in enumerate(kept)
            ),
            0,
        )
        al2 = Allocation(smaller, 1, {t.id: 0 for t in smaller.tasks})
        res2 = is_schedulable(smaller, al2)
        assert res2.schedulable
        for new_id, t in enumerate(kept):
            assert res2.per_task[new_id].wcrt <= base.per_task[t.id].wcrt
        checked += 1
    assert checked >= 10


def test_results_are_deterministic(f1, f1_alloc):
    a = is_schedulable(f1, f1_alloc)
    b = is_schedulable(f1, f1_alloc)
    assert a == b
    assert a.to_dict() == b.to_dict()


def test_result_to_dict_shape(f1, f1_alloc):
    d = is_schedulable(f1, f1_alloc).to_dict()
    assert d["schedulable"] is True
    assert d["first_failure"] is None
    assert set(d["per_task"]) == {"0", "1", "2"}
    entry = d["per_task"]["0"]
    assert entry["wcrt_ms"] == 1.5
    assert entry["blocking"]["dgb_low"] == 0.5
