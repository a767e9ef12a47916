"""Worst-case blocking bounds under the multiprocessor priority ceiling protocol.

Resources are guarded per core by priority-ceiling locks; requests for a
resource whose accessors span cores (global resources) queue across cores and
execute at the remote ceiling. The bound for a task splits into four parts:

* local blocking (dlb): lower-priority local tasks holding a local resource
  whose ceiling tops the task's priority, once per suspension opportunity;
* global blocking from lower-priority remote holders (dgb_low): one
  longest-hold window per own global request;
* global blocking from higher-priority remote sharers (dgb_high): every job
  of theirs inside the task's window may queue ahead;
* repeated local priority inversion (mli): lower-priority local tasks resume
  at ceiling level each time the task suspends on a global request.

Remote holds are padded by ``alpha``, the transitive delay a holder itself
suffers from co-located tasks running sections with even higher ceilings.

All terms depend only on the task set and the (possibly partial) allocation;
unassigned tasks contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    Allocation,
    TaskSet,
    ceiling_priority,
    lp_hp_sets,
    resource_locality,
)


@dataclass(frozen=True)
class BlockingBreakdown:
    """Per-task blocking bound, split by mechanism. Milliseconds."""

    dlb: float
    dgb_low: float
    dgb_high: float
    mli: float
    total: float

    def to_dict(self) -> dict:
        return {
            "dlb": self.dlb,
            "dgb_low": self.dgb_low,
            "dgb_high": self.dgb_high,
            "mli": self.mli,
            "total": self.total,
        }


class BlockingAnalysis:
    """Blocking queries for one (task set, allocation) pair.

    Builds locality, ceiling, and per-task summaries once so repeated queries
    (as issued by the response-time iteration and the partitioners) stay
    cheap. The allocation may be partial.
    """

    def __init__(self, ts: TaskSet, alloc: Allocation) -> None:
        if alloc.taskset is not ts and alloc.taskset != ts:
            raise ValueError("allocation was built for a different task set")
        self.ts = ts
        self.alloc = alloc
        self.locality = resource_locality(ts, alloc)
        self.global_resources = frozenset(
            k for k, loc in self.locality.items() if loc.is_global
        )
        self._ceiling: dict[int, int] = {}
        self._local_ceiling: dict[int, int] = {}
        self._alpha: dict[tuple[int, int], float] = {}
        self._n_global: dict[int, int] = {}
        self._breakdown: dict[int, BlockingBreakdown] = {}
        # Remote sharers are looked up per resource; restrict to assigned ids.
        self._assigned = set(alloc.assigned_ids)

    def ceiling(self, resource: int) -> int:
        ceil = self._ceiling.get(resource)
        if ceil is None:
            ceil = ceiling_priority(self.ts, resource)
            self._ceiling[resource] = ceil
        return ceil

    def local_ceiling(self, resource: int) -> int:
        """Ceiling of a local resource over its assigned accessors only."""
        ceil = self._local_ceiling.get(resource)
        if ceil is None:
            accessors = [i for i in self.ts.accessors(resource) if i in self._assigned]
            ceil = len(self.ts) + 1 + max(self.ts.task(i).priority for i in accessors)
            self._local_ceiling[resource] = ceil
        return ceil

    def n_global_sections(self, task_id: int) -> int:
        """Number of the task's critical sections on global resources."""
        n = self._n_global.get(task_id)
        if n is None:
            ts = self.ts
            n = sum(
                ts.access_count(task_id, k)
                for k in ts.resources_of(task_id)
                if k in self.global_resources
            )
            self._n_global[task_id] = n
        return n

    def alpha(self, task_id: int, resource: int) -> float:
        """Preemption overhead on top of one hold of ``resource`` by ``task_id``.

        While the holder runs at the resource ceiling, co-located tasks can
        still preempt it with sections on global resources of strictly higher
        ceiling; each such neighbour contributes at most its longest one.
        """
        key = (task_id, resource)
        cached = self._alpha.get(key)
        if cached is not None:
            return cached
        ts = self.ts
        own_ceiling = self.ceiling(resource)
        core = self.alloc.core_of(task_id)
        total = 0.0
        for other_id in self.alloc.tasks_on(core):
            if other_id == task_id:
                continue
            best = 0.0
            for r in sorted(ts.resources_of(other_id)):
                if r in self.global_resources and self.ceiling(r) > own_ceiling:
                    best = max(best, ts.max_section(other_id, r))
            total += best
        self._alpha[key] = total
        return total

    def dlb(self, task_id: int) -> float:
        """Local blocking: one ceiling-topped lower-priority hold per chance.

        The task can be blocked once on arrival plus once after each of its
        own global (suspending) requests, so the longest qualifying hold is
        charged 1 + N_global times.
        """
        ts = self.ts
        me = ts.task(task_id)
        core = self.alloc.core_of(task_id)
        lp, _ = lp_hp_sets(ts, self.alloc, task_id)
        best = 0.0
        for other_id in lp:
            for r in sorted(ts.resources_of(other_id)):
                loc = self.locality[r]
                if loc.is_local and loc.core == core and self.local_ceiling(r) > me.priority:
                    best = max(best, ts.max_section(other_id, r))
        return (1 + self.n_global_sections(task_id)) * best

    def dgb_low(self, task_id: int) -> float:
        """Remote lower-priority holders: one longest padded hold per request."""
        ts = self.ts
        me = ts.task(task_id)
        core = self.alloc.core_of(task_id)
        total = 0.0
        for k in sorted(ts.resources_of(task_id)):
            if k not in self.global_resources:
                continue
            best = 0.0
            for other_id in ts.accessors(k):
                if other_id == task_id or other_id not in self._assigned:
                    continue
                if self.alloc.core_of(other_id) == core:
                    continue
                if ts.task(other_id).priority >= me.priority:
                    continue
                cand = ts.max_section(other_id, k) + self.alpha(other_id, k)
                best = max(best, cand)
            total += ts.access_count(task_id, k) * best
        return total

    def dgb_high(self, task_id: int) -> float:
        """Remote higher-priority sharers: every job in the window queues ahead."""
        ts = self.ts
        me = ts.task(task_id)
        core = self.alloc.core_of(task_id)
        total = 0.0
        for k in sorted(ts.resources_of(task_id)):
            if k not in self.global_resources:
                continue
            for other_id in ts.accessors(k):
                if other_id == task_id or other_id not in self._assigned:
                    continue
                if self.alloc.core_of(other_id) == core:
                    continue
                other = ts.task(other_id)
                if other.priority <= me.priority:
                    continue
                jobs = math.ceil(me.period / other.period)
                total += jobs * (
                    ts.total_section(other_id, k)
                    + ts.access_count(other_id, k) * self.alpha(other_id, k)
                )
        return total

    def mli(self, task_id: int) -> float:
        """Repeated inversion by local lower-priority tasks with global sections.

        Each such task can run one ceiling-level section per suspension of
        this task and per own request, whichever bound is smaller.
        """
        ts = self.ts
        lp, _ = lp_hp_sets(ts, self.alloc, task_id)
        own_chances = 1 + self.n_global_sections(task_id)
        total = 0.0
        for other_id in lp:
            n_global = self.n_global_sections(other_id)
            if n_global == 0:
                continue
            best = 0.0
            for r in sorted(ts.resources_of(other_id)):
                if r in self.global_resources:
                    best = max(best, ts.max_section(other_id, r))
            total += min(own_chances, 2 * n_global) * best
        return total

    def worst_case_blocking(self, task_id: int) -> BlockingBreakdown:
        cached = self._breakdown.get(task_id)
        if cached is not None:
            return cached
        dlb = self.dlb(task_id)
        dgb_low = self.dgb_low(task_id)
        dgb_high = self.dgb_high(task_id)
        mli = self.mli(task_id)
        total = dlb + dgb_low + dgb_high + mli
        out = BlockingBreakdown(dlb, dgb_low, dgb_high, mli, total)
        self._breakdown[task_id] = out
        return out


def alpha(ts: TaskSet, alloc: Allocation, task_id: int, resource: int) -> float:
    return BlockingAnalysis(ts, alloc).alpha(task_id, resource)


def dlb(ts: TaskSet, alloc: Allocation, task_id: int) -> float:
    return BlockingAnalysis(ts, alloc).dlb(task_id)


def dgb_low(ts: TaskSet, alloc: Allocation, task_id: int) -> float:
    return BlockingAnalysis(ts, alloc).dgb_low(task_id)


def dgb_high(ts: TaskSet, alloc: Allocation, task_id: int) -> float:
    return BlockingAnalysis(ts, alloc).dgb_high(task_id)


def mli(ts: TaskSet, alloc: Allocation, task_id: int) -> float:
    return BlockingAnalysis(ts, alloc).mli(task_id)


def worst_case_blocking(ts: TaskSet, alloc: Allocation, task_id: int) -> BlockingBreakdown:
    return BlockingAnalysis(ts, alloc).worst_case_blocking(task_id)
