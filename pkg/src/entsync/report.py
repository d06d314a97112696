"""Post-processing of sweep summaries: topology comparison table, scaling
regressions, matching-number grouping, and fidelity-range analysis."""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from .metrics import RunSummary, linear_fit


def _mean(xs):
    return sum(xs) / len(xs)


def aggregate(summaries: Sequence[RunSummary]) -> dict:
    """Mean metrics per (topology, protocol, fidelity) cell across seeds."""
    groups: dict[tuple, list[RunSummary]] = defaultdict(list)
    for s in summaries:
        groups[(s.topology, s.protocol, s.fidelity)].append(s)
    cells = {}
    for (topo, proto, fid), runs in groups.items():
        cells[(topo, proto, fid)] = {
            "topology": topo,
            "protocol": proto,
            "fidelity": fid,
            "n_edges": runs[0].n_edges,
            "matching_number": runs[0].matching_number,
            "seeds": len(runs),
            "mean_latency_ms": _mean([r.mean_latency_ms for r in runs]),
            "mean_jitter_ms": _mean([r.jitter_ms for r in runs]),
            "mean_scaled_latency_ms": _mean([r.mean_scaled_latency_ms for r in runs]),
            "throughput_per_edge": _mean([r.throughput_per_edge for r in runs]),
            "mean_busy_ms": _mean([r.mean_busy_ms for r in runs]),
            "mean_queueing_ms": _mean([r.mean_queueing_ms for r in runs]),
        }
    return cells


def comparison_table(cells: dict, fidelity: float) -> list[dict]:
    """Per-topology latency/jitter comparison of the two protocols."""
    rows = []
    topologies = sorted({k[0] for k in cells})
    for topo in topologies:
        row = {"topology": topo}
        for proto in ("dqp", "esp"):
            cell = cells.get((topo, proto, fidelity))
            if cell is None:
                continue
            row["n_edges"] = cell["n_edges"]
            row["matching_number"] = cell["matching_number"]
            row[f"{proto}_latency_ms"] = cell["mean_latency_ms"]
            row[f"{proto}_jitter_ms"] = cell["mean_jitter_ms"]
        if "dqp_latency_ms" in row and "esp_latency_ms" in row:
            row["percent_difference"] = 100.0 * (
                row["esp_latency_ms"] - row["dqp_latency_ms"]) / row["dqp_latency_ms"]
        rows.append(row)
    return rows


def scaling_regressions(cells: dict, fidelity: float) -> dict:
    """OLS of mean latency and jitter against the edge count, per protocol."""
    out = {}
    for proto in ("esp", "dqp"):
        pts_l, pts_j = [], []
        for (topo, p, fid), cell in cells.items():
            if p == proto and fid == fidelity:
                pts_l.append((cell["n_edges"], cell["mean_latency_ms"]))
                pts_j.append((cell["n_edges"], cell["mean_jitter_ms"]))
        if len(pts_l) >= 2:
            m, c, r2 = linear_fit(pts_l)
            jm, jc, jr2 = linear_fit(pts_j)
            out[proto] = {
                "latency": {"slope": m, "intercept": c, "r_squared": r2},
                "jitter": {"slope": jm, "intercept": jc, "r_squared": jr2},
                "points": pts_l,
            }
    return out


def matching_groups(table: list[dict]) -> dict:
    """Percentage latency differences grouped by the matching number."""
    groups: dict[int, list[dict]] = defaultdict(list)
    for row in table:
        if "percent_difference" in row:
            groups[row["matching_number"]].append(row)
    out = {}
    for nu, rows in sorted(groups.items()):
        out[str(nu)] = {
            "topologies": [r["topology"] for r in rows],
            "percent_differences": [r["percent_difference"] for r in rows],
            "mean_abs_percent_difference": _mean(
                [abs(r["percent_difference"]) for r in rows]),
            "mean_percent_difference": _mean(
                [r["percent_difference"] for r in rows]),
        }
    return out


def fidelity_ranges(cells: dict, low: float, high: float) -> list[dict]:
    """Spread of mean latency between the lowest and highest fidelity."""
    rows = []
    topologies = sorted({k[0] for k in cells})
    for topo in topologies:
        row = {"topology": topo}
        for proto in ("dqp", "esp"):
            lo = cells.get((topo, proto, low))
            hi = cells.get((topo, proto, high))
            if lo and hi:
                row[f"{proto}_range_ms"] = (hi["mean_latency_ms"]
                                            - lo["mean_latency_ms"])
        if len(row) > 1:
            rows.append(row)
    return rows


def build_report(summaries: Sequence[RunSummary], fidelity: float = 0.75) -> dict:
    cells = aggregate(summaries)
    fidelities = sorted({s.fidelity for s in summaries})
    table = comparison_table(cells, fidelity)
    report = {
        "fidelity": fidelity,
        "comparison": table,
        "regressions": scaling_regressions(cells, fidelity),
        "matching_groups": matching_groups(table),
    }
    if len(fidelities) >= 2:
        report["fidelity_range"] = {
            "low": fidelities[0],
            "high": fidelities[-1],
            "rows": fidelity_ranges(cells, fidelities[0], fidelities[-1]),
        }
    regs = report["regressions"]
    if "esp" in regs and "dqp" in regs and regs["esp"]["latency"]["slope"] != 0:
        report["slope_ratio_dqp_over_esp"] = (
            regs["dqp"]["latency"]["slope"] / regs["esp"]["latency"]["slope"])
    return report


def write_report(report: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    serializable = {k: v for k, v in report.items()}
    (out_dir / "report.json").write_text(json.dumps(serializable, indent=2))
    _write_rows_csv(out_dir / "comparison.csv", report["comparison"])
    if "fidelity_range" in report:
        _write_rows_csv(out_dir / "fidelity_range.csv",
                        report["fidelity_range"]["rows"])


def _write_rows_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    names: list[str] = []
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        writer.writerows(rows)
