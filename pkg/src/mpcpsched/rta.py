"""Fixed-point response-time analysis for partitioned tasks with blocking.

Each assigned task is tested on its own core: worst-case response time is the
least fixed point of

    W = C_i + B_i + sum over local higher-priority j of
        ceil((W + dgb_low_i + dgb_high_i) / T_j) * C_j

started from W = C_i + dgb_low_i + dgb_high_i. The global-blocking terms are
added inside the interference window because the task's own suspensions let
local higher-priority jobs land in it. Iteration stops at exact equality; any
iterate past the deadline means the task is unschedulable and iteration would
only climb further, so it aborts immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .blocking import BlockingAnalysis, BlockingBreakdown
from .model import Allocation, TaskSet, lp_hp_sets


class DeadlineMiss(Exception):
    """Response-time iteration exceeded the task's deadline."""

    def __init__(self, task_id: int, iterate: float) -> None:
        super().__init__(f"task {task_id}: response-time iterate {iterate} exceeds deadline")
        self.task_id = task_id
        self.iterate = iterate


@dataclass(frozen=True)
class TaskAnalysis:
    """Outcome for one task: bound, blocking split, and verdict.

    On a deadline miss ``wcrt`` holds the first iterate past the deadline,
    still a valid lower bound on the true response time.
    """

    wcrt: float
    blocking: BlockingBreakdown
    schedulable: bool

    def to_dict(self) -> dict:
        return {
            "wcrt_ms": self.wcrt,
            "blocking": self.blocking.to_dict(),
            "schedulable": self.schedulable,
        }


@dataclass(frozen=True)
class RtaResult:
    """Schedulability verdict for every assigned task."""

    per_task: dict[int, TaskAnalysis]
    schedulable: bool
    first_failure: int | None

    def to_dict(self) -> dict:
        return {
            "schedulable": self.schedulable,
            "first_failure": self.first_failure,
            "per_task": {str(i): a.to_dict() for i, a in sorted(self.per_task.items())},
        }


def _fixed_point(analysis: BlockingAnalysis, task_id: int) -> tuple[float, int]:
    """Iterate to the least fixed point; returns (wcrt, iterations).

    Raises DeadlineMiss as soon as an iterate passes the deadline. The
    sequence is non-decreasing, so one late iterate settles the verdict.
    """
    ts = analysis.ts
    me = ts.task(task_id)
    blocking = analysis.worst_case_blocking(task_id)
    remote_gap = blocking.dgb_low + blocking.dgb_high
    _, hp = lp_hp_sets(ts, analysis.alloc, task_id)
    hp_tasks = [ts.task(j) for j in hp]
    w = me.wcet + remote_gap
    steps = 0
    while True:
        nxt = me.wcet + blocking.total
        for other in hp_tasks:
            nxt += math.ceil((w + remote_gap) / other.period) * other.wcet
        steps += 1
        if nxt > me.deadline:
            raise DeadlineMiss(task_id, nxt)
        if nxt == w:
            return w, steps
        w = nxt


def wcrt(ts: TaskSet, alloc: Allocation, task_id: int) -> float:
    """Worst-case response time of one assigned task; raises DeadlineMiss."""
    value, _ = _fixed_point(BlockingAnalysis(ts, alloc), task_id)
    return value


def is_schedulable(ts: TaskSet, alloc: Allocation) -> RtaResult:
    """Run the response-time test for every assigned task.

    Partial allocations are analysed as given: unassigned tasks neither get a
    verdict nor interfere. ``first_failure`` is the lowest-id failing task.
    """
    analysis = BlockingAnalysis(ts, alloc)
    per_task: dict[int, TaskAnalysis] = {}
    first_failure: int | None = None
    for task_id in alloc.assigned_ids:
        blocking = analysis.worst_case_blocking(task_id)
        try:
            value, _ = _fixed_point(analysis, task_id)
            ok = True
        except DeadlineMiss as miss:
            value = miss.iterate
            ok = False
        per_task[task_id] = TaskAnalysis(value, blocking, ok)
        if not ok and first_failure is None:
            first_failure = task_id
    return RtaResult(per_task, first_failure is None, first_failure)
