"""Figure rendering for the report commands.

Every figure is a derived artifact: the harness always writes the
long-format CSV behind it first.  Rendering is deterministic (fixed
hash salt, no embedded timestamps), so re-runs are byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "mpaudit"

__all__ = [
    "fig2_chart",
    "capacity_hist",
    "scatter_chart",
    "budget_sweep_chart",
    "coe_chart",
]

_SAVE_KW = dict(format="svg", metadata={"Date": None})


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def fig2_chart(rows: list[dict], path) -> None:
    """Diameter vs dictionary memory, one line per (budget, strategy).

    Solid lines: random audits (with stderr band); dashed: optimal.
    """
    budgets = sorted({r["budget"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = plt.cm.viridis([i / max(len(budgets) - 1, 1) for i in range(len(budgets))])
    for budget, color in zip(budgets, colors):
        for strategy, style in (("random", "-"), ("optimal", "--")):
            pts = sorted((r for r in rows if r["budget"] == budget
                          and r["strategy"] == strategy), key=lambda r: r["memory"])
            if not pts:
                continue
            xs = [r["memory"] for r in pts]
            ys = [r["diam"] for r in pts]
            ax.errorbar(xs, ys, yerr=[r["stderr"] for r in pts], color=color,
                        linestyle=style, capsize=2,
                        label=f"budget {budget} ({strategy})")
    ax.set_xlabel("dictionary memory m")
    ax.set_ylabel("version-space diameter")
    ax.legend(fontsize=7)
    _finish(fig, path)


def capacity_hist(per_family: dict[str, list[float]], path) -> None:
    """Histogram of per-class capacity estimates, one panel per family."""
    families = sorted(per_family)
    fig, axes = plt.subplots(1, max(len(families), 1),
                             figsize=(3 * max(len(families), 1), 3), squeeze=False)
    for ax, fam in zip(axes[0], families):
        ax.hist(per_family[fam], bins=20, range=(0.0, 1.0), color="steelblue")
        ax.set_title(fam)
        ax.set_xlabel("capacity")
    axes[0][0].set_ylabel("classes")
    _finish(fig, path)


def scatter_chart(points: list[dict], path) -> None:
    """Manipulability vs capacity; stars mark each family's selected class."""
    fig, ax = plt.subplots(figsize=(5, 4))
    families = sorted({p["family"] for p in points})
    colors = plt.cm.tab10(range(len(families)))
    for fam, color in zip(families, colors):
        own = [p for p in points if p["family"] == fam]
        ax.errorbar([p["capacity"] for p in own], [p["manipulability"] for p in own],
                    xerr=[p["capacity_stderr"] for p in own],
                    yerr=[p["manipulability_stderr"] for p in own],
                    fmt="o", color=color, markersize=4, capsize=2, label=fam)
        stars = [p for p in own if p["is_h_opt"]]
        if stars:
            ax.scatter([p["capacity"] for p in stars],
                       [p["manipulability"] for p in stars],
                       marker="*", s=180, color=color, edgecolors="black", zorder=5)
    ax.set_xlabel("capacity")
    ax.set_ylabel("manipulability")
    ax.legend(fontsize=7)
    _finish(fig, path)


def budget_sweep_chart(rows: list[dict], path) -> None:
    """Manipulability vs audit budget, one line per (family, selection role)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    series = sorted({(r["family"], r["role"]) for r in rows})
    for fam, role in series:
        pts = sorted((r for r in rows if r["family"] == fam and r["role"] == role),
                     key=lambda r: r["budget_fraction"])
        ax.errorbar([r["budget_fraction"] for r in pts],
                    [r["manipulability"] for r in pts],
                    yerr=[r["stderr"] for r in pts], marker="o", markersize=3,
                    capsize=2, label=f"{fam} ({role})")
    ax.set_xlabel("audit budget fraction")
    ax.set_ylabel("manipulability")
    ax.legend(fontsize=7)
    _finish(fig, path)


def coe_chart(rows: list[dict], path) -> None:
    """Cost of exhaustion per family with bootstrap confidence bars."""
    fig, ax = plt.subplots(figsize=(5, 4))
    rows = sorted(rows, key=lambda r: r["family"])
    xs = range(len(rows))
    ys = [r["cost"] for r in rows]
    yerr = [[r["cost"] - r["ci_low"] for r in rows],
            [r["ci_high"] - r["cost"] for r in rows]]
    ax.bar(xs, ys, yerr=yerr, capsize=4, color="steelblue")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r["family"] for r in rows])
    ax.set_ylabel("cost of exhaustion")
    _finish(fig, path)
