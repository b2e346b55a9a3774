"""Command-line entry points.

`sim` drives batch simulations (run / sweep / replay); `station` launches the
ground-station HTTP service. Exit codes: 0 success, 2 usage, 3 scenario
validation error, 4 internal defect.
"""

import json
import os
import sys
from pathlib import Path

import click

from .harness import SimDefect, replay as replay_artifacts, run as run_scenario
from .harness import sweep as run_sweep
from .scenario import ScenarioError, load_scenario

EXIT_VALIDATION = 3
EXIT_DEFECT = 4


def _fail_validation(exc: ScenarioError) -> None:
    for problem in exc.problems:
        click.echo(f"error: {problem}", err=True)
    sys.exit(EXIT_VALIDATION)


def _fail_defect(exc: SimDefect) -> None:
    click.echo(f"internal defect: {exc}", err=True)
    sys.exit(EXIT_DEFECT)


@click.group()
def sim():
    """Deterministic wave-powered USV simulation."""


@sim.command("run")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(), help="Scenario file (dotted key = value).")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Artifact output directory.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--duration", type=float, default=None,
              help="Override the scenario duration, seconds.")
def sim_run(scenario_path, out_dir, seed, duration):
    """Run one scenario and write CSV artifacts plus a summary."""
    try:
        config = load_scenario(scenario_path)
        if seed is not None or duration is not None:
            raw = dict(config.raw)
            if seed is not None:
                raw["seed"] = seed
            if duration is not None:
                raw["duration"] = duration
            from .scenario import build_config
            config = build_config(raw)
        artifacts = run_scenario(config, out_dir)
    except ScenarioError as exc:
        _fail_validation(exc)
    except SimDefect as exc:
        _fail_defect(exc)
    click.echo(json.dumps(artifacts.summary, sort_keys=True, indent=2))


@sim.command("sweep")
@click.option("--param", required=True,
              type=click.Choice(["foil_count", "spacing", "limit_angle", "spring_rate"]))
@click.option("--values", required=True,
              help="Comma-separated parameter values, e.g. 10,15,20.")
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def sim_sweep(param, values, scenario_path, out_dir):
    """Run one simulation per value and tabulate thrust and speed."""
    try:
        parsed = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"--values must be numeric, got {values!r}")
    if not parsed:
        raise click.UsageError("--values must list at least one value")
    try:
        config = load_scenario(scenario_path)
        rows = run_sweep(param, parsed, config, out_dir)
    except ScenarioError as exc:
        _fail_validation(exc)
    except SimDefect as exc:
        _fail_defect(exc)
    for row in rows:
        click.echo(
            f"{row['value']:g}: thrust {row['mean_thrust_n']:.4f} N, "
            f"speed {row['mean_speed']:.4f} m/s"
        )


@sim.command("replay")
@click.option("--artifacts", "artifacts_dir", required=True, type=click.Path())
def sim_replay(artifacts_dir):
    """Recompute the summary from emitted CSVs and verify it matches."""
    try:
        summary = replay_artifacts(artifacts_dir)
    except ScenarioError as exc:
        _fail_validation(exc)
    except FileNotFoundError as exc:
        _fail_validation(ScenarioError([str(exc)]))
    payload = (json.dumps(summary, sort_keys=True, indent=2) + "\n").encode()
    existing = Path(artifacts_dir) / "summary.json"
    if existing.exists() and existing.read_bytes() != payload:
        click.echo("replay summary does not match stored summary.json", err=True)
        sys.exit(EXIT_DEFECT)
    (Path(artifacts_dir) / "summary_replay.json").write_bytes(payload)
    click.echo(payload.decode(), nl=False)


@click.group()
def station():
    """Ground-station service."""


@station.command("serve")
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def station_serve(port, host):
    """Serve the station HTTP API (data dir from STATION_DATA_DIR)."""
    import uvicorn

    from .api import create_app
    from .station import StationStore

    data_dir = os.environ.get("STATION_DATA_DIR")
    store = StationStore(data_dir)
    app = create_app(store)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":  # pragma: no cover
    # `python -m usvsim.cli sim ...` / `... station ...`
    argv = sys.argv[1:]
    if argv and argv[0] == "station":
        station(argv[1:])
    else:
        sim(argv[1:] if argv and argv[0] == "sim" else argv)
