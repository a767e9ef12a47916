"""Seeded synthetic task-set generator.

Builds task sets of a requested total utilization: execution times uniform
on a range, per-task utilizations drawn by a range-constrained variant of
UUnifast, periods T_i = C_i / u_i, rate-monotonic priorities, and critical
sections on grouped resources (each block of ``tasks_per_group`` consecutive
tasks shares its own pool of ``resources_per_group`` resources, so sharing
never crosses groups).

Everything is driven by one 64-bit seed plus a trial index; the same pair
always reproduces the same task set, independent of how trials are spread
over processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import CriticalSection, Task, TaskSet
from .rng import Xoshiro256StarStar, derive_stream_seed


class ConfigError(ValueError):
    """A generator configuration value is out of its legal range."""


class InfeasibleError(ValueError):
    """No utilization vector can satisfy the requested sum and range."""


CONSTRAINED = "constrained"
CLASSIC = "uunifast"
GEN_MODES = (CONSTRAINED, CLASSIC)


@dataclass(frozen=True)
class GenConfig:
    """Knobs for one generated task set (defaults give load 8, 64 tasks)."""

    total_load: float = 8.0
    wcet_range: tuple[float, float] = (20.0, 100.0)
    util_range: tuple[float, float] = (0.1, 0.15)
    sections_per_task: tuple[int, int] = (2, 3)
    resources_per_group: int = 5
    tasks_per_group: int = 15
    cs_ratio: float = 0.12
    seed: int = 0
    mode: str = CONSTRAINED

    def __post_init__(self) -> None:
        lo_c, hi_c = self.wcet_range
        lo_u, hi_u = self.util_range
        lo_s, hi_s = self.sections_per_task
        if self.total_load < 0:
            raise ConfigError(f"total_load must be >= 0, got {self.total_load}")
        if not 0 < lo_c <= hi_c:
            raise ConfigError(f"wcet_range must satisfy 0 < lo <= hi, got {self.wcet_range}")
        if not 0 < lo_u <= hi_u <= 1:
            raise ConfigError(f"util_range must lie in (0, 1], got {self.util_range}")
        if not 0 <= lo_s <= hi_s:
            raise ConfigError(f"sections_per_task must satisfy 0 <= lo <= hi, got {self.sections_per_task}")
        if self.cs_ratio < 0:
            raise ConfigError(f"cs_ratio must be >= 0, got {self.cs_ratio}")
        # All sections of a task must fit inside its wcet.
        if self.cs_ratio * hi_s > 1:
            raise ConfigError(
                f"cs_ratio {self.cs_ratio} with up to {hi_s} sections per task "
                f"does not fit inside the wcet"
            )
        if self.resources_per_group < 1:
            raise ConfigError("resources_per_group must be >= 1")
        if self.tasks_per_group < 1:
            raise ConfigError("tasks_per_group must be >= 1")
        if self.mode not in GEN_MODES:
            raise ConfigError(f"mode must be one of {GEN_MODES}, got {self.mode!r}")


def task_count(cfg: GenConfig) -> int:
    """Number of tasks: the load divided by the mid-range utilization."""
    lo, hi = cfg.util_range
    return round(cfg.total_load / ((lo + hi) / 2))


def constrained_uunifast(
    total: float,
    n: int,
    util_range: tuple[float, float],
    rng: Xoshiro256StarStar,
) -> list[float]:
    """n utilizations summing to ``total``, each inside ``util_range``.

    Draw i.i.d. uniform on the range, rescale to the target sum, then repair:
    clamp out-of-range entries to the violated bound and spread the residual
    over the entries still strictly inside. Each pass pins at least one more
    entry, so the loop terminates; feasibility of the target guarantees the
    residual can always be absorbed.
    """
    lo, hi = util_range
    if n == 0:
        if abs(total) > 1e-9:
            raise InfeasibleError(f"cannot split load {total} over 0 tasks")
        return []
    if not (n * lo - 1e-9 <= total <= n * hi + 1e-9):
        raise InfeasibleError(
            f"sum {total} outside feasible range [{n * lo}, {n * hi}] for n={n}"
        )
    draws = [rng.uniform(lo, hi) for _ in range(n)]
    scale = total / math.fsum(draws)
    utils = [u * scale for u in draws]
    for _ in range(n + 2):
        utils = [min(max(u, lo), hi) for u in utils]
        residual = total - math.fsum(utils)
        if abs(residual) <= 1e-12:
            break
        if residual > 0:
            free = [i for i, u in enumerate(utils) if u < hi]
        else:
            free = [i for i, u in enumerate(utils) if u > lo]
        if not free:
            raise InfeasibleError(f"repair exhausted: residual {residual} with all entries pinned")
        share = residual / len(free)
        for i in free:
            utils[i] += share
    if abs(total - math.fsum(utils)) > 1e-9 or any(not lo <= u <= hi for u in utils):
        raise InfeasibleError("repair failed to converge to the requested sum")
    return utils


def uunifast(total: float, n: int, rng: Xoshiro256StarStar) -> list[float]:
    """Classic unconstrained UUnifast split of ``total`` into n utilizations."""
    if n == 0:
        if abs(total) > 1e-9:
            raise InfeasibleError(f"cannot split load {total} over 0 tasks")
        return []
    remaining = total
    utils = []
    for k in range(1, n):
        nxt = remaining * rng.random() ** (1.0 / (n - k))
        utils.append(remaining - nxt)
        remaining = nxt
    utils.append(remaining)
    return utils


def _draw_utilizations(cfg: GenConfig, n: int, rng: Xoshiro256StarStar) -> list[float]:
    lo, hi = cfg.util_range
    if lo == hi:
        # Degenerate range: every task gets exactly this utilization and the
        # realized load is n*u, the closest achievable to the requested one.
        return [lo] * n
    if cfg.mode == CLASSIC:
        # Pure UUnifast ignores the range; redraw the rare vectors with a
        # task that could not form a valid (C <= T) task.
        for _ in range(1000):
            utils = uunifast(cfg.total_load, n, rng)
            if all(0.0 < u <= 1.0 for u in utils):
                return utils
        raise InfeasibleError(f"classic UUnifast could not split {cfg.total_load} over {n} tasks")
    return constrained_uunifast(cfg.total_load, n, cfg.util_range, rng)


def generate(cfg: GenConfig, trial: int = 0) -> TaskSet:
    """Generate one task set from (cfg.seed, trial).

    Resource universe: ceil(n / tasks_per_group) groups of
    ``resources_per_group`` resources; task i draws all its sections from the
    pool of group i // tasks_per_group, possibly hitting the same resource
    more than once. Every section lasts wcet * cs_ratio. Priorities are
    rate monotonic (shorter period means higher priority, ties to lower id).
    """
    rng = Xoshiro256StarStar(derive_stream_seed(cfg.seed, trial))
    n = task_count(cfg)
    if n == 0:
        if cfg.total_load > 1e-9:
            raise InfeasibleError(f"load {cfg.total_load} rounds to 0 tasks")
        return TaskSet((), 0, None)
    utils = _draw_utilizations(cfg, n, rng)
    group_count = math.ceil(n / cfg.tasks_per_group)
    resource_count = group_count * cfg.resources_per_group
    lo_s, hi_s = cfg.sections_per_task
    lo_c, hi_c = cfg.wcet_range
    wcets: list[float] = []
    periods: list[float] = []
    sections_per: list[tuple[CriticalSection, ...]] = []
    for i in range(n):
        wcet = rng.uniform(lo_c, hi_c)
        count = rng.randint(lo_s, hi_s)
        base = (i // cfg.tasks_per_group) * cfg.resources_per_group
        duration = wcet * cfg.cs_ratio
        secs = tuple(
            CriticalSection(base + rng.randrange(cfg.resources_per_group), duration)
            for _ in range(count)
        )
        wcets.append(wcet)
        periods.append(wcet / utils[i])
        sections_per.append(secs)
    by_rate = sorted(range(n), key=lambda i: (periods[i], i))
    priority = [0] * n
    for rank, i in enumerate(by_rate):
        priority[i] = n - rank
    tasks = tuple(
        Task(i, wcets[i], periods[i], priority[i], sections_per[i]) for i in range(n)
    )
    groups = {k: k // cfg.resources_per_group for k in range(resource_count)}
    return TaskSet(tasks, resource_count, groups)
