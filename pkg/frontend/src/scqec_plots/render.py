"""Figure renderers for scqec run artifacts.

Each renderer takes parsed rows and returns a matplotlib Figure; saving
(PNG + SVG) is handled by the CLI.  Renderers only project columns that
passed schema validation.
"""

from __future__ import annotations

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def policy_bars(rows: list[dict]):
    """Bar chart of schedule length over critical path per policy, with
    router utilization overlaid on a second axis."""
    rows = sorted(rows, key=lambda r: r["policy"])
    policies = [r["policy"] for r in rows]
    ratios = [r["schedule_length"] / r["critical_path"] for r in rows]
    utils = [r["utilization"] for r in rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(p) for p in policies], ratios, color="steelblue")
    ax.set_xlabel("scheduling policy")
    ax.set_ylabel("schedule length / critical path")
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1)

    ax2 = ax.twinx()
    ax2.plot([str(p) for p in policies], utils, "o-", color="darkorange")
    ax2.set_ylabel("router utilization")
    ax2.set_ylim(bottom=0)
    fig.tight_layout()
    return fig


def window_curves(rows: list[dict]):
    """EPR buffer high-water and schedule length versus look-ahead window."""
    rows = sorted(rows, key=lambda r: r["W"])
    finite = [r["W"] for r in rows if not math.isinf(r["W"])]
    # plot inf one log decade past the largest finite window
    x_inf = 10 * max(finite) if finite else 1.0
    xs = [x_inf if math.isinf(r["W"]) else max(r["W"], 0.5) for r in rows]

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, [r["epr_high_water"] for r in rows], "o-",
            color="steelblue", label="EPR high water")
    ax.set_xscale("log")
    ax.set_xlabel("look-ahead window W (cycles)")
    ax.set_ylabel("live EPR pairs (max)")

    ax2 = ax.twinx()
    ax2.plot(xs, [r["schedule_length"] for r in rows], "s--",
             color="darkorange", label="schedule length")
    ax2.set_ylabel("schedule length (cycles)")
    fig.legend(loc="upper center", ncol=2)
    fig.tight_layout()
    return fig


def boundary(rows: list[dict]):
    """Log-log favorability boundary: crossover op count vs p_P, one
    curve per workload family."""
    by_family: dict[str, list[dict]] = defaultdict(list)
    for r in rows:
        by_family[r["family"]].append(r)

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, cells in sorted(by_family.items()):
        cells = sorted(cells, key=lambda r: r["p_P"])
        pts = [(r["p_P"], r["crossover_ops"]) for r in cells
               if r["crossover_ops"] is not None]
        if not pts:
            continue
        ax.plot([p for p, _ in pts], [n for _, n in pts], "o-", label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("physical error rate $p_P$")
    ax.set_ylabel("crossover op count")
    ax.legend()
    fig.tight_layout()
    return fig


def scaling_curves(rows: list[dict]):
    """Absolute spacetime cost vs op count for both encodings, log-log."""
    rows = sorted(rows, key=lambda r: r["ops"])
    xs = [r["ops"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, [r["dd_spacetime"] for r in rows], "o-",
            color="steelblue", label="double defect")
    ax.plot(xs, [r["planar_spacetime"] for r in rows], "s--",
            color="darkorange", label="planar")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("op count")
    ax.set_ylabel("spacetime (qubit-seconds)")
    ax.legend()
    fig.tight_layout()
    return fig


def ratio_curve(rows: list[dict]):
    """Double-defect over planar spacetime ratio vs op count; the curve
    crossing 1 marks the favorability crossover."""
    rows = sorted(rows, key=lambda r: r["ops"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r["ops"] for r in rows], [r["ratio"] for r in rows], "o-",
            color="steelblue")
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1)
    ax.set_xscale("log")
    ax.set_xlabel("op count")
    ax.set_ylabel("double defect / planar spacetime")
    fig.tight_layout()
    return fig


def gantt(rows: list[dict]):
    """Horizontal bar per braid span, ordered by opening cycle."""
    rows = sorted(rows, key=lambda r: (r["open"], r["op"]))
    fig, ax = plt.subplots(figsize=(7, max(2, 0.25 * len(rows))))
    for y, r in enumerate(rows):
        width = max(r["close"] - r["open"], 0.3)  # keep zero-length visible
        ax.barh(y, width, left=r["open"], height=0.7, color="steelblue")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([f"op {r['op']}" for r in rows], fontsize=6)
    ax.invert_yaxis()
    ax.set_xlabel("cycle")
    ax.set_ylabel("braid")
    fig.tight_layout()
    return fig


RENDERERS = {
    "policy-bars": ("stats", policy_bars),
    "window": ("window", window_curves),
    "boundary": ("boundary", boundary),
    "scaling": ("scaling", scaling_curves),
    "ratio": ("scaling", ratio_curve),
    "gantt": ("gantt", gantt),
}
