"""Task-to-core partitioning: blocking-aware worst-fit and the plain baseline.

The blocking-aware heuristic (``allocate_brwfd``) ranks tasks by an inflated
utilization that charges an allocation-independent estimate of global
blocking, then places each task on the core whose residents share the most
resources with it, falling back to the least-loaded core whenever that
placement would push the core's blocking load past the running maximum.
``allocate_wfd`` is the classic utilization-only worst-fit decreasing with
the same incremental schedulability check, so comparisons isolate the
placement policy rather than the checking discipline.

Both allocators are deterministic: every tie is broken by load then index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .model import Allocation, TaskSet
from .rta import is_schedulable


class NotSchedulableWithinCap(Exception):
    """The core-count search hit its cap without finding a feasible partition."""

    def __init__(self, cap: int, algorithm: str) -> None:
        super().__init__(f"no schedulable partition with up to {cap} cores ({algorithm})")
        self.cap = cap
        self.algorithm = algorithm


@dataclass(frozen=True)
class PbuEntry:
    """Blocking-inflated utilization of one task and its two ingredients."""

    pgb_low: float
    pgb_high: float
    pbu: float


@dataclass(frozen=True)
class PbuTable:
    """Pessimistic blocking utilization per task, computed before placement."""

    beta: float
    entries: Mapping[int, PbuEntry]

    def __getitem__(self, task_id: int) -> PbuEntry:
        return self.entries[task_id]

    def pbu(self, task_id: int) -> float:
        return self.entries[task_id].pbu


@dataclass(frozen=True)
class TraceEntry:
    """One placement step. ``candidate`` is the similarity pick, None when no
    core shares resources with the task; ``fallback`` marks min-load placement
    (zero similarity or a rejected candidate) rather than the candidate."""

    task_id: int
    candidate: int | None
    chosen: int
    fallback: bool

    def to_dict(self) -> dict:
        return {
            "task": self.task_id,
            "candidate": self.candidate,
            "chosen": self.chosen,
            "fallback": self.fallback,
        }


RTA_FAIL = "rta_fail"
CORE_OVERFLOW = "core_overflow"


@dataclass(frozen=True)
class AllocationFailure:
    kind: str
    task_id: int | None = None


@dataclass(frozen=True)
class PartitionOutcome:
    """Result of one allocator run: the allocation or the failure, per-core
    utilization and blocking load, and the full placement trace."""

    allocation: Allocation | None
    failure: AllocationFailure | None
    core_utilization: tuple[float, ...]
    core_blocking_load: tuple[float, ...]
    trace: tuple[TraceEntry, ...]

    @property
    def ok(self) -> bool:
        return self.failure is None

    def to_dict(self) -> dict:
        out: dict = {
            "schedulable": self.ok,
            "core_utilization": list(self.core_utilization),
            "core_blocking_load": list(self.core_blocking_load),
            "trace": [t.to_dict() for t in self.trace],
        }
        if self.allocation is not None:
            out["core_count"] = self.allocation.core_count
            out["assignment"] = {str(i): c for i, c in sorted(self.allocation.assignment.items())}
            out["cores"] = [
                list(self.allocation.tasks_on(c)) for c in range(self.allocation.core_count)
            ]
        if self.failure is not None:
            out["failure"] = {"kind": self.failure.kind, "task": self.failure.task_id}
        return out


def pgb_low(ts: TaskSet, task_id: int) -> float:
    """Placement-free bound on blocking by lower-priority resource sharers.

    Pessimistic on purpose: every resource is treated as global and every
    sharer as remote, one longest hold per resource.
    """
    me = ts.task(task_id)
    total = 0.0
    for k in sorted(me.resources):
        best = 0.0
        for other_id in ts.accessors(k):
            if other_id == task_id:
                continue
            if ts.task(other_id).priority < me.priority:
                best = max(best, ts.max_section(other_id, k))
        total += best
    return total


def pgb_high(ts: TaskSet, task_id: int) -> float:
    """Placement-free bound on blocking by higher-priority resource sharers."""
    me = ts.task(task_id)
    total = 0.0
    for k in sorted(me.resources):
        for other_id in ts.accessors(k):
            if other_id == task_id:
                continue
            other = ts.task(other_id)
            if other.priority > me.priority:
                total += math.ceil(me.period / other.period) * ts.total_section(other_id, k)
    return total


def pbu_table(ts: TaskSet, beta: float = 0.1) -> PbuTable:
    """Blocking-inflated utilization (C_i + beta*(pgb_low+pgb_high))/T_i per task."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    entries = {}
    for t in ts.tasks:
        low = pgb_low(ts, t.id)
        high = pgb_high(ts, t.id)
        entries[t.id] = PbuEntry(low, high, (t.wcet + beta * (low + high)) / t.period)
    return PbuTable(beta, entries)


def resource_correlation(ts: TaskSet, i: int, j: int) -> int:
    """Number of resources both tasks access."""
    if i == j:
        raise ValueError("resource_correlation needs two distinct tasks")
    return len(ts.resources_of(i) & ts.resources_of(j))


def resource_similarity(ts: TaskSet, alloc: Allocation, task_id: int, core: int) -> int:
    """Summed resource overlap between a task and a core's current residents."""
    return sum(
        resource_correlation(ts, task_id, other_id)
        for other_id in alloc.tasks_on(core)
        if other_id != task_id
    )


def _outcome(
    alloc: Allocation,
    failure: AllocationFailure | None,
    util: list[float],
    load: list[float],
    trace: list[TraceEntry],
) -> PartitionOutcome:
    return PartitionOutcome(
        None if failure is not None else alloc,
        failure,
        tuple(util),
        tuple(load),
        tuple(trace),
    )


def allocate_brwfd(ts: TaskSet, core_count: int, beta: float = 0.1) -> PartitionOutcome:
    """Blocking-aware worst-fit: similarity first, blocking-load cap second.

    Placement order is descending blocking-inflated utilization (ties: lower
    id first). For each task the candidate core maximizes resource similarity
    (ties: smaller blocking load, then lower index); a candidate whose
    blocking load would exceed the running maximum across cores, and any task
    with zero similarity everywhere, is instead placed on the core of minimal
    blocking load (ties: lower index). After each commit the partial
    allocation must pass the response-time test or the run fails fast.
    """
    if core_count < 1 and len(ts) > 0:
        raise ValueError(f"core_count must be >= 1 to place tasks, got {core_count}")
    table = pbu_table(ts, beta)
    order = sorted(range(len(ts)), key=lambda i: (-table.pbu(i), i))
    cores = max(core_count, 0)
    bu = [0.0] * cores
    util = [0.0] * cores
    bu_max = 0.0
    # Per-core count of residents per resource; similarity to a core is the
    # sum of these counts over the incoming task's resources.
    held: list[dict[int, int]] = [dict() for _ in range(cores)]
    alloc = Allocation(ts, cores, {})
    trace: list[TraceEntry] = []
    for task_id in order:
        my_resources = sorted(ts.resources_of(task_id))
        sims = [sum(counts.get(r, 0) for r in my_resources) for counts in held]
        best_sim = max(sims) if sims else 0
        candidate: int | None
        if best_sim == 0:
            candidate = None
            chosen = min(range(cores), key=lambda c: (bu[c], c))
            fallback = True
        else:
            candidate = min(range(cores), key=lambda c: (-sims[c], bu[c], c))
            if bu[candidate] + table.pbu(task_id) > bu_max:
                chosen = min(range(cores), key=lambda c: (bu[c], c))
                fallback = True
            else:
                chosen = candidate
                fallback = False
        alloc = alloc.extend(task_id, chosen)
        bu[chosen] += table.pbu(task_id)
        util[chosen] += ts.task(task_id).utilization
        bu_max = max(bu_max, bu[chosen])
        for r in my_resources:
            held[chosen][r] = held[chosen].get(r, 0) + 1
        trace.append(TraceEntry(task_id, candidate, chosen, fallback))
        verdict = is_schedulable(ts, alloc)
        if not verdict.schedulable:
            failure = AllocationFailure(RTA_FAIL, verdict.first_failure)
            return _outcome(alloc, failure, util, bu, trace)
    return _outcome(alloc, None, util, bu, trace)


def allocate_wfd(ts: TaskSet, core_count: int) -> PartitionOutcome:
    """Utilization-only worst-fit decreasing with the same fail-fast check.

    Blocking plays no part in placement; the reported per-core blocking load
    is just the utilization so the two allocators' outcomes line up.
    """
    if core_count < 1 and len(ts) > 0:
        raise ValueError(f"core_count must be >= 1 to place tasks, got {core_count}")
    cores = max(core_count, 0)
    order = sorted(range(len(ts)), key=lambda i: (-ts.task(i).utilization, i))
    util = [0.0] * cores
    alloc = Allocation(ts, cores, {})
    trace: list[TraceEntry] = []
    for task_id in order:
        chosen = min(range(cores), key=lambda c: (util[c], c))
        alloc = alloc.extend(task_id, chosen)
        util[chosen] += ts.task(task_id).utilization
        trace.append(TraceEntry(task_id, None, chosen, False))
        verdict = is_schedulable(ts, alloc)
        if not verdict.schedulable:
            failure = AllocationFailure(RTA_FAIL, verdict.first_failure)
            return _outcome(alloc, failure, util, list(util), trace)
    return _outcome(alloc, None, util, list(util), trace)


Allocator = Callable[[TaskSet, int], PartitionOutcome]

ALGORITHMS: dict[str, Allocator] = {
    "brwfd": allocate_brwfd,
    "wfd": allocate_wfd,
}


def min_cores(
    ts: TaskSet,
    algorithm: str | Allocator = "brwfd",
    beta: float = 0.1,
    cap: int | None = None,
) -> int:
    """Smallest core count on which the allocator finds a feasible partition.

    Starts at the utilization lower bound ceil(sum C_i/T_i) and counts up,
    returning the first success. Raises NotSchedulableWithinCap past ``cap``
    (default 8x the start).
    """
    if not ts.tasks:
        return 0
    if callable(algorithm):
        name = getattr(algorithm, "__name__", "custom")
        allocator = algorithm
    else:
        name = algorithm
        try:
            allocator = ALGORITHMS[algorithm]
        except KeyError:
            raise ValueError(f"unknown algorithm {algorithm!r}, expected one of "
                             f"{sorted(ALGORITHMS)}") from None
    # Tolerate float dust when the load sums to an integer.
    start = max(1, math.ceil(ts.total_utilization - 1e-9))
    if cap is None:
        cap = 8 * start
    if cap < start:
        raise ValueError(f"cap {cap} is below the search start {start}")
    for m in range(start, cap + 1):
        if allocator is allocate_brwfd:
            outcome = allocate_brwfd(ts, m, beta)
        else:
            outcome = allocator(ts, m)
        if outcome.ok:
            return m
    raise NotSchedulableWithinCap(cap, name)
