"""Command-line entry points: run one cell, sweep a config, build a report."""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .harness import (
    ExperimentConfig,
    cell_name,
    read_summaries_csv,
    run_one,
    run_sweep,
    write_requests_csv,
    write_summaries_csv,
)
from .network import InvariantViolation
from .physics import LinkPhysics
from .report import build_report, write_report
from . import plots

EXIT_INVARIANT = 2


@click.group()
def main():
    """Discrete-event evaluation of entanglement control-plane protocols."""


def _physics_options(fn):
    fn = click.option("--link-length", type=float, default=2000.0,
                      show_default=True, help="Link length in meters.")(fn)
    fn = click.option("--p-det", type=float, default=LinkPhysics().p_det,
                      show_default=True, help="Base detection efficiency.")(fn)
    return fn


@main.command()
@click.option("--topology", required=True, help="e.g. grid:3x3, complete:4, star:3")
@click.option("--protocol", type=click.Choice(["esp", "dqp"]), required=True)
@click.option("--fidelity", type=float, default=0.75, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--sim-time", type=float, default=120.0, show_default=True,
              help="Simulated seconds.")
@click.option("--mean-backoff-ms", type=float, default=50.0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
              show_default=True)
@click.option("--trace/--no-trace", default=False,
              help="Also write the per-event trace file.")
@_physics_options
def run(topology, protocol, fidelity, seed, sim_time, mean_backoff_ms, out,
        trace, link_length, p_det):
    """Simulate one cell and write its per-request and summary CSVs."""
    physics = LinkPhysics(link_length_m=link_length, p_det=p_det)
    try:
        result = run_one(topology, protocol, fidelity, seed,
                         sim_time_s=sim_time, physics=physics,
                         mean_backoff_ms=mean_backoff_ms,
                         collect_event_trace=trace)
    except InvariantViolation as exc:
        click.echo(f"invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    out.mkdir(parents=True, exist_ok=True)
    name = cell_name(topology, protocol, fidelity, seed)
    write_requests_csv(out / f"requests_{name}.csv", result.timelines)
    write_summaries_csv(out / f"summary_{name}.csv", [result.summary])
    if trace and result.event_trace is not None:
        (out / f"events_{name}.trace").write_text(
            "\n".join(result.event_trace) + "\n")
    s = result.summary
    click.echo(f"{name}: n={s.n_requests} mean latency {s.mean_latency_ms:.2f} ms, "
               f"jitter {s.jitter_ms:.2f} ms, throughput {s.throughput_per_edge:.2f}/s/edge")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="YAML experiment config.")
@click.option("--desk", is_flag=True,
              help="Use the short CI profile (30 s, 3 seeds, 3 fidelities).")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
              show_default=True)
def sweep(config_path, desk, out):
    """Run the full topology x protocol x fidelity x seed sweep."""
    try:
        if config_path is not None:
            config = ExperimentConfig.from_yaml(config_path)
        elif desk:
            config = ExperimentConfig.desk_profile()
        else:
            config = ExperimentConfig()
    except (ValueError, TypeError) as exc:
        raise click.UsageError(f"bad config: {exc}")
    try:
        summaries = run_sweep(config, out)
    except InvariantViolation as exc:
        click.echo(f"invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    click.echo(f"{len(summaries)} runs -> {out / 'summary.csv'}")
    report = build_report(summaries)
    write_report(report, out)
    figures = plots.render_all(report, out)
    for fig in figures:
        click.echo(f"wrote {fig}")


@main.command("report")
@click.option("--in", "in_dir", type=click.Path(exists=True, path_type=Path),
              required=True, help="Directory containing summary.csv.")
@click.option("--fidelity", type=float, default=0.75, show_default=True,
              help="Fidelity used for the comparison table and regressions.")
def report_cmd(in_dir, fidelity):
    """Rebuild regression report and figures from an existing sweep output."""
    summary_path = in_dir / "summary.csv"
    if not summary_path.exists():
        raise click.UsageError(f"no summary.csv in {in_dir}")
    summaries = read_summaries_csv(summary_path)
    report = build_report(summaries, fidelity=fidelity)
    write_report(report, in_dir)
    figures = plots.render_all(report, in_dir)
    regs = report.get("regressions", {})
    for proto, reg in regs.items():
        fit = reg["latency"]
        click.echo(f"{proto}: latency slope {fit['slope']:.2f} ms/edge, "
                   f"R^2 {fit['r_squared']:.3f}")
    if "slope_ratio_dqp_over_esp" in report:
        click.echo(f"slope ratio dqp/esp: {report['slope_ratio_dqp_over_esp']:.2f}")
    for fig in figures:
        click.echo(f"wrote {fig}")


if __name__ == "__main__":
    main()
