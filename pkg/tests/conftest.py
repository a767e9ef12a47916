"""Shared fixtures: the hand-checked three-task example and random-set helpers.

The fixture set (called F1 throughout the tests) was worked out by hand
before the implementation existed, so its numbers serve as an independent
oracle: two cores, tasks t0(C=1, T=4, prio 3) and t1(C=2, T=10, prio 2) on
core 0, t2(C=3, T=20, prio 1) on core 1, one resource r0 held 0.2 ms by t0
and 0.5 ms by t2.

Hand-derived values:
  ceiling(r0) = (3+1) + 3 = 7
  blocking    t0: dgb_low 0.5 (t2's remote hold), t1: 0, t2: dgb_high
              ceil(20/4) * 0.2 = 1.0
  wcrt        t0: 1 + 0.5 = 1.5; t1: 2 + ceil(3/4 hits)... = 3.0; t2: 4.0
  pgb_low     (0.5, 0, 0); pgb_high (0, 0, 1.0)
  pbu(0.1)    ((1 + 0.05)/4, 2/10, (3 + 0.1)/20) = (0.2625, 0.2, 0.155)
  brwfd m=2   order t0,t1,t2; t0 -> core0 (min-load, BUmax 0 -> 0.2625);
              t1 -> core1 (no shared resources); t2 candidate core0
              (similarity 1) rejected: 0.2625 + 0.155 > BUmax -> core1;
              final {core0: {t0}, core1: {t1, t2}}
"""

from __future__ import annotations

import pytest

from mpcpsched import Allocation, CriticalSection, Task, TaskSet
from mpcpsched.rng import Xoshiro256StarStar


def make_f1_taskset() -> TaskSet:
    return TaskSet(
        tasks=(
            Task(0, 1.0, 4.0, 3, (CriticalSection(0, 0.2),)),
            Task(1, 2.0, 10.0, 2, ()),
            Task(2, 3.0, 20.0, 1, (CriticalSection(0, 0.5),)),
        ),
        resource_count=1,
    )


@pytest.fixture
def f1() -> TaskSet:
    return make_f1_taskset()


@pytest.fixture
def f1_alloc(f1) -> Allocation:
    return Allocation(f1, 2, {0: 0, 1: 0, 2: 1})


def random_taskset(rng: Xoshiro256StarStar, n: int, resource_count: int,
                   max_sections: int = 2, u_lo: float = 0.05,
                   u_hi: float = 0.4) -> TaskSet:
    """Small random-but-valid task set for property tests (RM priorities)."""
    wcets, periods, sections = [], [], []
    for _ in range(n):
        wcet = rng.uniform(5.0, 50.0)
        util = rng.uniform(u_lo, u_hi)
        count = rng.randint(0, max_sections) if resource_count else 0
        # Keep every section short enough that all of them fit inside C.
        budget = wcet / max_sections if max_sections else wcet
        secs = tuple(
            CriticalSection(rng.randrange(resource_count), rng.uniform(0.01, budget))
            for _ in range(count)
        )
        wcets.append(wcet)
        periods.append(wcet / util)
        sections.append(secs)
    order = sorted(range(n), key=lambda i: (periods[i], i))
    priority = [0] * n
    for rank, i in enumerate(order):
        priority[i] = n - rank
    tasks = tuple(Task(i, wcets[i], periods[i], priority[i], sections[i]) for i in range(n))
    return TaskSet(tasks, resource_count)


def random_allocation(rng: Xoshiro256StarStar, ts: TaskSet, cores: int,
                      partial: bool = False) -> Allocation:
    assignment = {}
    for t in ts.tasks:
        if partial and rng.random() < 0.3:
            continue
        assignment[t.id] = rng.randrange(cores)
    return Allocation(ts, cores, assignment)
