"""Figure rendering for sweep reports. All figures go to files (Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

PROTO_COLORS = {"esp": "tab:blue", "dqp": "tab:orange"}


def plot_latency_scaling(report: dict, path: Path) -> None:
    """Mean latency vs edge count with the per-protocol regression lines."""
    fig, ax = plt.subplots(figsize=(6, 4))
    regs = report.get("regressions", {})
    for proto, reg in regs.items():
        xs = [p[0] for p in reg["points"]]
        ys = [p[1] for p in reg["points"]]
        color = PROTO_COLORS.get(proto)
        ax.scatter(xs, ys, label=proto.upper(), color=color)
        fit = reg["latency"]
        xr = [min(xs), max(xs)]
        ax.plot(xr, [fit["slope"] * x + fit["intercept"] for x in xr],
                "--", color=color,
                label=f"{proto.upper()} fit m={fit['slope']:.2f}")
    ax.set_xlabel("edges in quantum graph")
    ax.set_ylabel("mean request latency (ms)")
    ax.set_title(f"Latency scaling (fidelity {report['fidelity']})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_matching_groups(report: dict, path: Path) -> None:
    """Percent latency difference of each topology, grouped by matching number."""
    rows = [r for r in report.get("comparison", []) if "percent_difference" in r]
    if not rows:
        return
    rows.sort(key=lambda r: (r["matching_number"], r["topology"]))
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = [r["topology"] for r in rows]
    values = [r["percent_difference"] for r in rows]
    colors = ["tab:green" if r["matching_number"] > 1 else "tab:gray" for r in rows]
    ax.bar(range(len(rows)), values, color=colors)
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("latency difference vs baseline (%)")
    for i, r in enumerate(rows):
        ax.annotate(f"ν={r['matching_number']}", (i, values[i]),
                    textcoords="offset points", xytext=(0, 4),
                    ha="center", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fidelity_ranges(report: dict, path: Path) -> None:
    """Latency spread between lowest and highest fidelity, per topology."""
    fr = report.get("fidelity_range")
    if not fr or not fr["rows"]:
        return
    rows = fr["rows"]
    fig, ax = plt.subplots(figsize=(7, 4))
    idx = range(len(rows))
    width = 0.38
    for off, proto in ((-width / 2, "dqp"), (width / 2, "esp")):
        vals = [r.get(f"{proto}_range_ms", 0.0) for r in rows]
        ax.bar([i + off for i in idx], vals, width,
               label=proto.upper(), color=PROTO_COLORS[proto])
    ax.set_xticks(list(idx))
    ax.set_xticklabels([r["topology"] for r in rows], rotation=45, ha="right")
    ax.set_ylabel(f"latency range F={fr['low']} to F={fr['high']} (ms)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_all(report: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fn in (("latency_scaling.png", plot_latency_scaling),
                     ("matching_groups.png", plot_matching_groups),
                     ("fidelity_range.png", plot_fidelity_ranges)):
        path = out_dir / name
        fn(report, path)
        if path.exists():
            written.append(path)
    return written
