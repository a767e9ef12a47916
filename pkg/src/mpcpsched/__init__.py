"""Schedulability analysis and task partitioning for multicore systems whose
tasks share resources under per-core priority-ceiling locking.

The package provides the task/allocation model, worst-case blocking bounds,
a response-time schedulability test, a blocking-aware worst-fit partitioner
with a plain worst-fit baseline, a seeded task-set generator, and an
experiment harness with a CLI (``mpcpsched``).
"""

from .model import (
    Allocation,
    CriticalSection,
    NoAccessorError,
    ResourceLocality,
    Task,
    TaskSet,
    TaskSetError,
    UnassignedTaskError,
    ceiling_priority,
    load_taskset,
    lp_hp_sets,
    resource_locality,
    save_taskset,
    taskset_from_dict,
    taskset_to_dict,
)
from .blocking import (
    BlockingAnalysis,
    BlockingBreakdown,
    alpha,
    dgb_high,
    dgb_low,
    dlb,
    mli,
    worst_case_blocking,
)
from .rta import DeadlineMiss, RtaResult, TaskAnalysis, is_schedulable, wcrt
from .partition import (
    ALGORITHMS,
    AllocationFailure,
    NotSchedulableWithinCap,
    PartitionOutcome,
    PbuEntry,
    PbuTable,
    TraceEntry,
    allocate_brwfd,
    allocate_wfd,
    min_cores,
    pbu_table,
    pgb_high,
    pgb_low,
    resource_correlation,
    resource_similarity,
)
from .taskgen import (
    ConfigError,
    GenConfig,
    InfeasibleError,
    constrained_uunifast,
    generate,
    task_count,
    uunifast,
)
from .experiments import (
    ExperimentRecord,
    SummaryRow,
    SweepResult,
    SweepSpec,
    summarize_cores,
    summarize_ratio,
    sweep_cores,
    sweep_ratio,
    write_outputs,
)
from .rng import SplitMix64, Xoshiro256StarStar, derive_stream_seed

__version__ = "0.1.0"

__all__ = [
    "Allocation", "CriticalSection", "NoAccessorError", "ResourceLocality",
    "Task", "TaskSet", "TaskSetError", "UnassignedTaskError",
    "ceiling_priority", "load_taskset", "lp_hp_sets", "resource_locality",
    "save_taskset", "taskset_from_dict", "taskset_to_dict",
    "BlockingAnalysis", "BlockingBreakdown", "alpha", "dgb_high", "dgb_low",
    "dlb", "mli", "worst_case_blocking",
    "DeadlineMiss", "RtaResult", "TaskAnalysis", "is_schedulable", "wcrt",
    "ALGORITHMS", "AllocationFailure", "NotSchedulableWithinCap",
    "PartitionOutcome", "PbuEntry", "PbuTable", "TraceEntry",
    "allocate_brwfd", "allocate_wfd", "min_cores", "pbu_table", "pgb_high",
    "pgb_low", "resource_correlation", "resource_similarity",
    "ConfigError", "GenConfig", "InfeasibleError", "constrained_uunifast",
    "generate", "task_count", "uunifast",
    "ExperimentRecord", "SummaryRow", "SweepResult", "SweepSpec",
    "summarize_cores", "summarize_ratio", "sweep_cores", "sweep_ratio",
    "write_outputs",
    "SplitMix64", "Xoshiro256StarStar", "derive_stream_seed",
    "__version__",
]
