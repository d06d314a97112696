"""Experiment orchestration: single runs, sweeps, CSV emission."""
from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .dqp import DqpNetwork
from .engine import Engine
from .esp import EspNetwork
from .metrics import NS_PER_S, RequestTimeline, RunSummary, summarize
from .network import ProtocolEvent
from .physics import LinkPhysics
from .topology import build_topology, control_plane, matching_number, EVALUATION_SUITE
from .workload import DEFAULT_MEAN_BACKOFF_NS, Workload

PROTOCOLS = {"esp": EspNetwork, "dqp": DqpNetwork}

DEFAULT_FIDELITIES = tuple(round(0.50 + 0.05 * i, 2) for i in range(9))  # 0.50..0.90


@dataclass
class ExperimentConfig:
    topologies: tuple[str, ...] = EVALUATION_SUITE
    protocols: tuple[str, ...] = ("esp", "dqp")
    fidelities: tuple[float, ...] = DEFAULT_FIDELITIES
    sim_time_s: float = 120.0
    seeds: tuple[int, ...] = tuple(range(10))
    physics: LinkPhysics = field(default_factory=LinkPhysics)
    mean_backoff_ms: float = 50.0
    size_range: tuple[int, int] = (1, 6)
    trace: bool = False

    def __post_init__(self):
        if not (self.topologies and self.protocols and self.fidelities and self.seeds):
            raise ValueError("config lists must be non-empty")
        for f in self.fidelities:
            if not 0.5 <= f < 1.0:
                raise ValueError(f"fidelity {f} outside [0.5, 1)")
        if self.sim_time_s <= 0:
            raise ValueError("sim_time must be positive")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ValueError(f"unknown protocol {p!r}")

    @classmethod
    def from_yaml(cls, path: str | Path) -> "ExperimentConfig":
        raw = yaml.safe_load(Path(path).read_text()) or {}
        phys = LinkPhysics(**raw.pop("physics", {}))
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key in ("topologies", "protocols", "fidelities", "seeds"):
            if key in raw:
                raw[key] = tuple(raw[key])
        if "size_range" in raw:
            raw["size_range"] = tuple(raw["size_range"])
        return cls(physics=phys, **raw)

    #: CI-scale profile: short runs, few seeds.
    @classmethod
    def desk_profile(cls, **overrides) -> "ExperimentConfig":
        base = dict(sim_time_s=30.0, seeds=(1, 2, 3),
                    fidelities=(0.5, 0.75, 0.9))
        base.update(overrides)
        return cls(**base)


@dataclass
class RunResult:
    summary: RunSummary
    timelines: list[RequestTimeline]
    protocol_events: list[ProtocolEvent]
    event_trace: Optional[list[str]] = None


def run_one(topology: str, protocol: str, fidelity: float, seed: int,
            sim_time_s: float = 120.0, physics: Optional[LinkPhysics] = None,
            mean_backoff_ms: float = 50.0, size_range: tuple[int, int] = (1, 6),
            collect_event_trace: bool = False) -> RunResult:
    """Simulate one (topology, protocol, fidelity, seed) cell."""
    physics = physics or LinkPhysics()
    topo = build_topology(topology)
    control_plane(topo, protocol)  # validates the mode
    event_trace: Optional[list[str]] = [] if collect_event_trace else None
    engine = Engine(seed=seed,
                    trace_hook=event_trace.append if collect_event_trace else None)
    net = PROTOCOLS[protocol](engine, topo, physics, fidelity)
    workload = Workload(net, mean_backoff_ns=mean_backoff_ms * 1e6,
                        size_range=size_range)
    workload.start()
    engine.run_until(round(sim_time_s * NS_PER_S))
    timelines = list(net.timelines.values())
    summary = summarize(timelines, topology=topo.label, protocol=protocol,
                        fidelity=fidelity, seed=seed, sim_time_s=sim_time_s,
                        n_edges=len(topo.edges), matching=matching_number(topo))
    return RunResult(summary, timelines, net.protocol_events or [], event_trace)


REQUEST_CSV_HEADER = ("request_id,topology,protocol,fidelity,edge,pairs,"
                      "NL_start_ns,PL_start_ns,PL_finish_ns,NL_finish_ns")


def requests_csv_lines(timelines: Sequence[RequestTimeline]) -> list[str]:
    lines = [REQUEST_CSV_HEADER]
    for tl in sorted(timelines, key=lambda t: t.request_id):
        lines.append(",".join(str(v) if v is not None else "" for v in (
            tl.request_id, tl.topology, tl.protocol, tl.fidelity,
            f"{tl.edge[0]}|{tl.edge[1]}", tl.pairs,
            tl.nl_start, tl.pl_start, tl.pl_finish, tl.nl_finish)))
    return lines


def write_requests_csv(path: Path, timelines: Sequence[RequestTimeline]) -> None:
    path.write_text("\n".join(requests_csv_lines(timelines)) + "\n")


def write_summaries_csv(path: Path, summaries: Sequence[RunSummary]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        names = [f.name for f in dataclasses.fields(RunSummary)]
        writer.writerow(names)
        for s in summaries:
            writer.writerow([_fmt(getattr(s, n)) for n in names])


def read_summaries_csv(path: Path) -> list[RunSummary]:
    out = []
    with path.open() as fh:
        for row in csv.DictReader(fh):
            kwargs = {f.name: _parse(f, row[f.name])
                      for f in dataclasses.fields(RunSummary)}
            out.append(RunSummary(**kwargs))
    return out


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6f}"  # ms with microsecond precision, stable bytes
    return value


def _parse(f, raw):
    if f.type in ("int", int):
        return int(raw)
    if f.type in ("float", float):
        return float(raw)
    return raw


def cell_name(topology: str, protocol: str, fidelity: float, seed: int) -> str:
    return f"{topology.replace(':', '_')}__{protocol}__f{fidelity:.2f}__s{seed}"


def run_sweep(config: ExperimentConfig, out_dir: Path,
              write_request_files: bool = True) -> list[RunSummary]:
    """Run every cell of the sweep; cells are independent, failures are
    reported per cell and do not stop the sweep."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries: list[RunSummary] = []
    failures: list[str] = []
    for topology in config.topologies:
        for protocol in config.protocols:
            for fidelity in config.fidelities:
                for seed in config.seeds:
                    try:
                        result = run_one(
                            topology, protocol, fidelity, seed,
                            sim_time_s=config.sim_time_s, physics=config.physics,
                            mean_backoff_ms=config.mean_backoff_ms,
                            size_range=config.size_range,
                            collect_event_trace=config.trace)
                    except Exception as exc:  # keep sweeping
                        failures.append(
                            f"{cell_name(topology, protocol, fidelity, seed)}: {exc}")
                        continue
                    summaries.append(result.summary)
                    if write_request_files:
                        name = cell_name(topology, protocol, fidelity, seed)
                        write_requests_csv(out_dir / f"requests_{name}.csv",
                                           result.timelines)
                        if config.trace and result.event_trace is not None:
                            (out_dir / f"events_{name}.trace").write_text(
                                "\n".join(result.event_trace) + "\n")
    write_summaries_csv(out_dir / "summary.csv", summaries)
    if failures:
        (out_dir / "failures.json").write_text(json.dumps(failures, indent=2))
    return summaries
