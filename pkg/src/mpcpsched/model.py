"""Task, resource, and allocation model for partitioned fixed-priority scheduling.

Tasks are sporadic with implicit deadlines (D_i = T_i) and carry a list of
critical sections, each naming a shared resource and a worst-case hold time.
An Allocation pins a subset of the tasks to cores; analyses accept partial
allocations so partitioning heuristics can test prefixes incrementally.

Units: all durations (wcet, period, section lengths) are milliseconds.
Priorities are positive integers, larger means higher priority.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class TaskSetError(ValueError):
    """A task set or task-set file violates a structural requirement."""


class NoAccessorError(LookupError):
    """A ceiling was requested for a resource that no task accesses."""


class UnassignedTaskError(LookupError):
    """An allocation query named a task the allocation does not place."""


@dataclass(frozen=True)
class CriticalSection:
    """One access to a shared resource: which resource, and for how long."""

    resource: int
    duration: float

    def __post_init__(self) -> None:
        if self.resource < 0:
            raise TaskSetError(f"section resource id must be >= 0, got {self.resource}")
        if self.duration < 0:
            raise TaskSetError(f"section duration must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class Task:
    id: int
    wcet: float
    period: float
    priority: int
    sections: tuple[CriticalSection, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sections", tuple(self.sections))
        if self.id < 0:
            raise TaskSetError(f"task id must be >= 0, got {self.id}")
        if self.wcet <= 0:
            raise TaskSetError(f"task {self.id}: wcet must be positive, got {self.wcet}")
        if self.period < self.wcet:
            raise TaskSetError(
                f"task {self.id}: wcet {self.wcet} exceeds period {self.period}"
            )
        if self.priority < 1:
            raise TaskSetError(f"task {self.id}: priority must be >= 1, got {self.priority}")
        total = sum(s.duration for s in self.sections)
        if total > self.wcet:
            raise TaskSetError(
                f"task {self.id}: section time {total} exceeds wcet {self.wcet}"
            )

    @property
    def deadline(self) -> float:
        return self.period

    @property
    def utilization(self) -> float:
        return self.wcet / self.period

    @cached_property
    def resources(self) -> frozenset[int]:
        return frozenset(s.resource for s in self.sections)


@dataclass(frozen=True)
class TaskSet:
    """An immutable task set plus per-task resource usage summaries.

    Task ids must be 0..n-1 and priorities must be a permutation of 1..n,
    so every pair of tasks is strictly priority-ordered.
    """

    tasks: tuple[Task, ...]
    resource_count: int = 0
    groups: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        tasks = tuple(sorted(self.tasks, key=lambda t: t.id))
        object.__setattr__(self, "tasks", tasks)
        if self.groups is not None:
            object.__setattr__(self, "groups", dict(self.groups))
        n = len(tasks)
        ids = [t.id for t in tasks]
        if ids != list(range(n)):
            raise TaskSetError(f"task ids must be exactly 0..{n - 1}, got {sorted(ids)}")
        if sorted(t.priority for t in tasks) != list(range(1, n + 1)):
            raise TaskSetError(f"priorities must be a permutation of 1..{n}")
        if self.resource_count < 0:
            raise TaskSetError("resource_count must be >= 0")
        for t in tasks:
            for s in t.sections:
                if s.resource >= self.resource_count:
                    raise TaskSetError(
                        f"task {t.id}: resource {s.resource} out of range "
                        f"(resource_count={self.resource_count})"
                    )
        if self.groups is not None:
            for k in self.groups:
                if not 0 <= k < self.resource_count:
                    raise TaskSetError(f"groups key {k} is not a valid resource id")

    def __len__(self) -> int:
        return len(self.tasks)

    def task(self, task_id: int) -> Task:
        try:
            return self.tasks[task_id]
        except IndexError:
            raise KeyError(f"no task with id {task_id}") from None

    @cached_property
    def total_utilization(self) -> float:
        return sum(t.utilization for t in self.tasks)

    @cached_property
    def _usage(self) -> dict[int, dict[int, tuple[int, float, float]]]:
        # per task id: resource -> (access count, longest section, summed sections)
        out: dict[int, dict[int, tuple[int, float, float]]] = {}
        for t in self.tasks:
            per: dict[int, tuple[int, float, float]] = {}
            for s in t.sections:
                n, mx, tot = per.get(s.resource, (0, 0.0, 0.0))
                per[s.resource] = (n + 1, max(mx, s.duration), tot + s.duration)
            out[t.id] = per
        return out

    @cached_property
    def _accessors(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for t in self.tasks:
            for k in sorted(t.resources):
                out.setdefault(k, []).append(t.id)
        return {k: tuple(ids) for k, ids in out.items()}

    def resources_of(self, task_id: int) -> frozenset[int]:
        """Resource ids task ``task_id`` accesses at least once."""
        return self.task(task_id).resources

    def access_count(self, task_id: int, resource: int) -> int:
        """Number of critical sections of the task on the resource."""
        entry = self._usage[self.task(task_id).id].get(resource)
        return entry[0] if entry else 0

    def max_section(self, task_id: int, resource: int) -> float:
        """Longest single hold of the resource by the task (0 if unused)."""
        entry = self._usage[self.task(task_id).id].get(resource)
        return entry[1] if entry else 0.0

    def total_section(self, task_id: int, resource: int) -> float:
        """Summed hold time of the resource across the task's sections."""
        entry = self._usage[self.task(task_id).id].get(resource)
        return entry[2] if entry else 0.0

    def accessors(self, resource: int) -> tuple[int, ...]:
        """Ids of all tasks with at least one section on the resource."""
        return self._accessors.get(resource, ())


# Resource placement classification under an allocation.
UNUSED = "unused"
LOCAL = "local"
GLOBAL = "global"


@dataclass(frozen=True)
class ResourceLocality:
    """Where a resource lives: unused, local to one core, or global."""

    scope: str
    core: int | None = None

    @property
    def is_global(self) -> bool:
        return self.scope == GLOBAL

    @property
    def is_local(self) -> bool:
        return self.scope == LOCAL


@dataclass(frozen=True)
class Allocation:
    """A (possibly partial) assignment of tasks to cores 0..core_count-1."""

    taskset: TaskSet
    core_count: int
    assignment: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", dict(self.assignment))
        if self.core_count < 0:
            raise TaskSetError("core_count must be >= 0")
        n = len(self.taskset)
        for task_id, core in self.assignment.items():
            if not 0 <= task_id < n:
                raise TaskSetError(f"assignment names unknown task {task_id}")
            if not 0 <= core < self.core_count:
                raise TaskSetError(
                    f"task {task_id} assigned to core {core}, valid range is "
                    f"0..{self.core_count - 1}"
                )

    def __contains__(self, task_id: int) -> bool:
        return task_id in self.assignment

    def __len__(self) -> int:
        return len(self.assignment)

    @cached_property
    def assigned_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.assignment))

    def core_of(self, task_id: int) -> int:
        try:
            return self.assignment[task_id]
        except KeyError:
            raise UnassignedTaskError(f"task {task_id} is not assigned to a core") from None

    @cached_property
    def _core_members(self) -> tuple[tuple[int, ...], ...]:
        members: list[list[int]] = [[] for _ in range(self.core_count)]
        for task_id in self.assigned_ids:
            members[self.assignment[task_id]].append(task_id)
        return tuple(tuple(ids) for ids in members)

    def tasks_on(self, core: int) -> tuple[int, ...]:
        """Ids assigned to ``core``, ascending."""
        return self._core_members[core]

    def utilization(self, core: int) -> float:
        ts = self.taskset
        return sum(ts.task(i).utilization for i in self.tasks_on(core))

    def utilizations(self) -> tuple[float, ...]:
        return tuple(self.utilization(c) for c in range(self.core_count))

    def extend(self, task_id: int, core: int) -> "Allocation":
        """New allocation with one more task placed; the original is untouched."""
        if task_id in self.assignment:
            raise TaskSetError(f"task {task_id} is already assigned")
        new_map = dict(self.assignment)
        new_map[task_id] = core
        return Allocation(self.taskset, self.core_count, new_map)


def resource_locality(ts: TaskSet, alloc: Allocation) -> dict[int, ResourceLocality]:
    """Classify every resource as unused, local to a core, or global.

    Only assigned tasks count: a resource whose assigned accessors all sit on
    one core is local there even if unassigned tasks also use it.
    """
    cores_using: dict[int, set[int]] = {k: set() for k in range(ts.resource_count)}
    for task_id in alloc.assigned_ids:
        core = alloc.core_of(task_id)
        for k in ts.resources_of(task_id):
            cores_using[k].add(core)
    out: dict[int, ResourceLocality] = {}
    for k in range(ts.resource_count):
        cores = cores_using[k]
        if not cores:
            out[k] = ResourceLocality(UNUSED)
        elif len(cores) == 1:
            out[k] = ResourceLocality(LOCAL, next(iter(cores)))
        else:
            out[k] = ResourceLocality(GLOBAL)
    return out


def ceiling_priority(ts: TaskSet, resource: int) -> int:
    """Priority ceiling of a shared resource.

    Ceilings sit in a band strictly above every task priority: base n+1 plus
    the highest priority among the resource's accessors, so any two resources
    compare by their top accessor.
    """
    accessors = ts.accessors(resource)
    if not accessors:
        raise NoAccessorError(f"resource {resource} is accessed by no task")
    base = len(ts) + 1
    return base + max(ts.task(i).priority for i in accessors)


def lp_hp_sets(ts: TaskSet, alloc: Allocation, task_id: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Lower- and higher-priority assigned tasks sharing ``task_id``'s core."""
    me = ts.task(task_id)
    core = alloc.core_of(task_id)
    lp: list[int] = []
    hp: list[int] = []
    for other_id in alloc.tasks_on(core):
        if other_id == task_id:
            continue
        if ts.task(other_id).priority < me.priority:
            lp.append(other_id)
        else:
            hp.append(other_id)
    return tuple(lp), tuple(hp)


# ---------------------------------------------------------------------------
# JSON interchange


def taskset_to_dict(ts: TaskSet) -> dict:
    """Plain-dict form of a task set, stable ordering, suitable for json.dump."""
    out: dict = {
        "resource_count": ts.resource_count,
        "tasks": [
            {
                "id": t.id,
                "wcet_ms": t.wcet,
                "period_ms": t.period,
                "priority": t.priority,
                "sections": [
                    {"resource": s.resource, "duration_ms": s.duration} for s in t.sections
                ],
            }
            for t in ts.tasks
        ],
    }
    if ts.groups is not None:
        out["groups"] = {str(k): g for k, g in sorted(ts.groups.items())}
    return out


def _need(obj: dict, key: str, kinds, where: str):
    if key not in obj:
        raise TaskSetError(f"{where}: missing required key '{key}'")
    val = obj[key]
    if not isinstance(val, kinds) or isinstance(val, bool):
        raise TaskSetError(f"{where}.{key}: expected {kinds}, got {type(val).__name__}")
    return val


def taskset_from_dict(obj, where: str = "taskset") -> TaskSet:
    """Validate and build a TaskSet from decoded JSON, naming the bad path on error."""
    if not isinstance(obj, dict):
        raise TaskSetError(f"{where}: expected an object, got {type(obj).__name__}")
    resource_count = _need(obj, "resource_count", int, where)
    raw_tasks = _need(obj, "tasks", list, where)
    tasks = []
    for idx, raw in enumerate(raw_tasks):
        at = f"{where}.tasks[{idx}]"
        if not isinstance(raw, dict):
            raise TaskSetError(f"{at}: expected an object, got {type(raw).__name__}")
        task_id = _need(raw, "id", int, at)
        wcet = float(_need(raw, "wcet_ms", (int, float), at))
        period = float(_need(raw, "period_ms", (int, float), at))
        priority = _need(raw, "priority", int, at)
        sections = []
        raw_sections = raw.get("sections", [])
        if not isinstance(raw_sections, list):
            raise TaskSetError(f"{at}.sections: expected a list")
        for s_idx, raw_s in enumerate(raw_sections):
            s_at = f"{at}.sections[{s_idx}]"
            if not isinstance(raw_s, dict):
                raise TaskSetError(f"{s_at}: expected an object")
            resource = _need(raw_s, "resource", int, s_at)
            duration = float(_need(raw_s, "duration_ms", (int, float), s_at))
            try:
                sections.append(CriticalSection(resource, duration))
            except TaskSetError as exc:
                raise TaskSetError(f"{s_at}: {exc}") from None
        try:
            tasks.append(Task(task_id, wcet, period, priority, tuple(sections)))
        except TaskSetError as exc:
            raise TaskSetError(f"{at}: {exc}") from None
    groups = None
    if "groups" in obj and obj["groups"] is not None:
        raw_groups = obj["groups"]
        if not isinstance(raw_groups, dict):
            raise TaskSetError(f"{where}.groups: expected an object")
        groups = {}
        for key, val in raw_groups.items():
            try:
                k = int(key)
            except (TypeError, ValueError):
                raise TaskSetError(f"{where}.groups: key {key!r} is not a resource id") from None
            if not isinstance(val, int) or isinstance(val, bool):
                raise TaskSetError(f"{where}.groups[{key}]: expected an int group id")
            groups[k] = val
    try:
        return TaskSet(tuple(tasks), resource_count, groups)
    except TaskSetError as exc:
        raise TaskSetError(f"{where}: {exc}") from None


def load_taskset(path) -> TaskSet:
    """Read a task-set JSON file; errors carry the file position or key path."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TaskSetError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return taskset_from_dict(obj, where=str(path))


def save_taskset(ts: TaskSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(taskset_to_dict(ts), fh, indent=2, sort_keys=True)
        fh.write("\n")
