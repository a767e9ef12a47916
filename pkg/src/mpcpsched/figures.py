"""Render sweep summaries and analysis reports as PNG figures.

Kept separate from the harness so worker processes never import matplotlib.
All functions write files and return the paths; nothing is shown on screen.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

_ALGO_STYLE = {
    "brwfd": {"color": "tab:blue", "marker": "o", "label": "BR-WFD"},
    "wfd": {"color": "tab:orange", "marker": "s", "label": "WFD"},
}

_AXIS_LABEL = {
    "cs_ratio": "critical-section ratio",
    "util": "per-task utilization",
    "core_multiple": "core multiple (cores = ceil(multiple x load))",
    "resources_per_group": "resources per group",
    "load": "system load",
}


def _style(algorithm: str) -> dict:
    return dict(_ALGO_STYLE.get(algorithm, {"marker": "x", "label": algorithm}))


def render_ratio_figure(summary_rows, axis: str, outdir) -> Path:
    """Schedulable ratio versus the swept axis, one line per algorithm."""
    out = Path(outdir) / "schedulable_ratio.png"
    series: dict[str, list[tuple[float, float]]] = {}
    for row in summary_rows:
        if row.metric != "schedulable_ratio" or row.value is None:
            continue
        series.setdefault(row.algorithm, []).append((dict(row.point)[axis], row.value))
    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm in sorted(series):
        pts = sorted(series[algorithm])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], **_style(algorithm))
    ax.set_xlabel(_AXIS_LABEL.get(axis, axis))
    ax.set_ylabel("schedulable ratio")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_cores_figures(summary_rows, outdir) -> list[Path]:
    """Mean required cores per cs_ratio (one panel per load) and the saving."""
    outdir = Path(outdir)
    loads = sorted({dict(row.point)["load"] for row in summary_rows})
    paths: list[Path] = []

    fig, axes = plt.subplots(1, len(loads), figsize=(4.5 * len(loads), 4),
                             squeeze=False, sharey=True)
    for idx, load in enumerate(loads):
        ax = axes[0][idx]
        series: dict[str, list[tuple[float, float]]] = {}
        for row in summary_rows:
            point = dict(row.point)
            if row.metric != "mean_cores" or row.value is None or point["load"] != load:
                continue
            series.setdefault(row.algorithm, []).append((point["cs_ratio"], row.value))
        for algorithm in sorted(series):
            pts = sorted(series[algorithm])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], **_style(algorithm))
        ax.set_title(f"load = {load:g}")
        ax.set_xlabel(_AXIS_LABEL["cs_ratio"])
        ax.grid(True, alpha=0.3)
        if idx == 0:
            ax.set_ylabel("mean required cores")
            ax.legend()
    fig.tight_layout()
    cores_path = outdir / "mean_cores.png"
    fig.savefig(cores_path, dpi=150)
    plt.close(fig)
    paths.append(cores_path)

    fig, ax = plt.subplots(figsize=(6, 4))
    for load in loads:
        pts = sorted(
            (dict(row.point)["cs_ratio"], row.value)
            for row in summary_rows
            if row.metric == "reduction_pct" and row.value is not None
            and dict(row.point)["load"] == load
        )
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=f"load = {load:g}")
    ax.set_xlabel(_AXIS_LABEL["cs_ratio"])
    ax.set_ylabel("core reduction of BR-WFD over WFD (%)")
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    reduction_path = outdir / "core_reduction.png"
    fig.savefig(reduction_path, dpi=150)
    plt.close(fig)
    paths.append(reduction_path)
    return paths


def render_analysis_figure(report: dict, outdir) -> Path:
    """Per-task view of one analysis report: blocking split and response times.

    ``report`` is the dict produced by the analyze command: per-task rows
    with blocking components, wcrt, and deadline.
    """
    out = Path(outdir) / "task_report.png"
    rows = report["tasks"]
    ids = [row["id"] for row in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(max(6, 0.45 * len(ids)), 7),
                                      sharex=True)
    bottoms = [0.0] * len(rows)
    for key, label in (("dlb", "local"), ("dgb_low", "global lp"),
                       ("dgb_high", "global hp"), ("mli", "repeated inversion")):
        heights = [row["blocking"][key] for row in rows]
        top.bar(ids, heights, bottom=bottoms, label=label)
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    top.set_ylabel("blocking bound (ms)")
    top.grid(True, axis="y", alpha=0.3)
    top.legend(fontsize="small")

    colors = ["tab:green" if row["schedulable"] else "tab:red" for row in rows]
    bottom.bar(ids, [row["wcrt_ms"] for row in rows], color=colors, label="wcrt")
    bottom.plot(ids, [row["deadline_ms"] for row in rows], linestyle="none",
                marker="_", markersize=12, color="black", label="deadline")
    bottom.set_xlabel("task id")
    bottom.set_ylabel("response time (ms)")
    bottom.grid(True, axis="y", alpha=0.3)
    bottom.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
