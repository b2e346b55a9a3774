"""Deterministic run loop wiring vehicle, power, sensors, guidance, links and
the in-process ground station together, with CSV artifact emission.

Everything is driven off one fixed dt grid from a single seed; re-running the
same configuration reproduces byte-identical artifacts. The summary is always
computed from the emitted rows (parsed back at their written precision), so
`replay` on the artifact directory regenerates it byte-for-byte.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import guidance, power, sensors, station, vehicle, wire
from .geo import LocalFrame, wrap_angle
from .links import UPLINK, Logbook, SatChannel, rf_transmit
from .scenario import ScenarioConfig, ScenarioError, default_config

STATE_SCHEMA = "state v1"
ENERGY_SCHEMA = "energy v1"
LINK_SCHEMA = "link v1"
SWEEP_SCHEMA = "sweep v1"

SWEEP_PARAMS = {
    "foil_count": "foil.count",
    "spacing": "foil.spacing",
    "limit_angle": "foil.upper_stop_deg",
    "spring_rate": "spring.rate",
}

_ACCEL_WINDOW = 1024

STATE_COLUMNS = (
    "t,x,y,lat,lon,heading_deg,surge,heave,heave_rate,rudder_deg,"
    "pitch_mean_deg,thrust_n,tether_n,taut,glider_depth,line_length,"
    "sea_state_m,waypoints_arrived,soc,on_backup,capsized,thruster_on"
)
ENERGY_COLUMNS = (
    "t,solar_available_w,solar_in_w,servo_w,thruster_w,winch_w,"
    "electronics_w,comms_w,requested_w,shed_w,soc,backup_soc,on_backup,"
    "load_shed,cum_solar_wh,cum_load_wh,cum_battery_delta_wh"
)
LINK_COLUMNS = "t,path,dir,event,size,info"


class SimDefect(Exception):
    """Non-finite state or another internal defect; not a user error."""

    def __init__(self, step_index: int, module: str, detail: str):
        super().__init__(f"step {step_index} [{module}]: {detail}")
        self.step_index = step_index
        self.module = module


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, str)):
        return str(x)
    return format(x, ".10g")


def irradiance_at(t: float, config: ScenarioConfig) -> float:
    """Diurnal irradiance fraction: half-sine between dawn and dusk."""
    tod = t % 86400.0
    dawn = config.irradiance_dawn
    day = config.irradiance_day_length
    if not dawn <= tod <= dawn + day:
        return 0.0
    return config.irradiance_peak * math.sin(math.pi * (tod - dawn) / day)


@dataclass
class RunArtifacts:
    out_dir: Path | None
    summary: dict
    state_rows: list[str] = field(default_factory=list)
    energy_rows: list[str] = field(default_factory=list)
    link_rows: list[str] = field(default_factory=list)
    world: object = None


class _World:
    """Mutable run state kept out of the artifact surface (for tests)."""

    def __init__(self):
        self.vstate: vehicle.VehicleState | None = None
        self.bank: power.BatteryBank | None = None
        self.store: station.StationStore | None = None
        self.channel: SatChannel | None = None
        self.tracker: guidance.MissionTracker | None = None
        self.logbook: Logbook | None = None
        self.applied_mission_version = 0
        self.uplink_seq = 0
        self.frames_sent = 0
        self.ticks_sampled: list[power.PowerTick] = []


def _check_finite(step_index: int, module: str, **values) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise SimDefect(step_index, module, f"{name} is {v!r}")


def run(config: ScenarioConfig, out_dir: str | Path | None = None) -> RunArtifacts:
    """Execute one scenario and emit artifacts (files only when out_dir set)."""
    frame = LocalFrame(config.origin_lat, config.origin_lon)
    specs = config.specs
    world = _World()
    world.vstate = vehicle.initial_state(
        specs, heading=config.initial_heading,
        x=config.initial_x, y=config.initial_y,
    )
    world.bank = config.bank
    world.store = station.StationStore()
    world.channel = SatChannel(config.sat)
    world.tracker = guidance.MissionTracker(
        [guidance.Waypoint(h, *frame.to_xy(lat, lon)) for h, lat, lon in config.mission],
        arrival_radius=config.arrival_radius,
    )

    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
    world.logbook = Logbook(out_path / "logbook.jsonl" if out_path else None)

    seed_seq = np.random.SeedSequence(config.seed)
    kinds = list(sensors.SENSOR_CATALOG)
    rngs = {
        kind: np.random.default_rng(child)
        for kind, child in zip(kinds, seed_seq.spawn(len(kinds)))
    }
    sensor_states = {}
    latest_readings = {}
    for kind in kinds:
        spec = sensors.SENSOR_CATALOG[kind]
        t0_truth = sensors.truth(
            config.env_fields[kind.value], config.initial_x, config.initial_y, 0.0
        )
        sensor_states[kind] = sensors.initial_state(spec, t0_truth)
        latest_readings[kind.value] = sensor_states[kind].internal_value

    accel_ring: deque[float] = deque(maxlen=_ACCEL_WINDOW)
    rf_log: list[tuple] = []

    dt = config.dt
    steps = config.steps
    sample_every = max(1, int(round(config.sensors_sample_period / dt)))
    guidance_every = max(1, int(round(config.guidance_update_period / dt)))
    output_every = max(1, int(round(config.output_cadence / dt)))
    uplink_every = max(1, int(round(config.comms_cadence / dt)))
    comms_load = config.comms_idle_load + (
        config.comms_message_energy / config.comms_cadence
    )

    rudder_cmd = 0.0
    thruster_cmd = config.thruster_level
    capsize_done = config.capsize_at is None
    upload_done = config.mission_upload is None
    sea_state_est = 0.0
    cum_solar_wh = 0.0
    cum_load_wh = 0.0
    cum_delta_wh = 0.0
    pending_acks: list[int] = []

    state_rows: list[str] = []
    energy_rows: list[str] = []

    def emit_uplink(data: bytes, t: float) -> None:
        """Route one vehicle frame: RF when in range, satellite otherwise."""
        v = world.vstate
        dist = math.hypot(v.x, v.y)
        if dist <= config.rf.max_range:
            payload, reason = rf_transmit(
                data, config.rf.key, config.rf, (v.x, v.y), (0.0, 0.0)
            )
            rf_log.append((t, "rf", UPLINK, reason, len(data), ""))
            if payload is not None:
                _station_receive(payload, t)
            return
        world.channel.send(data, t, UPLINK)

    def _station_receive(data: bytes, t: float) -> None:
        decoded = wire.decode(data)
        if isinstance(decoded, wire.TelemetryFrame):
            world.store.ingest(decoded, config.vehicle_id)
        elif isinstance(decoded, wire.AckFrame):
            world.store.handle_ack(decoded, config.vehicle_id, t)

    def _vehicle_receive(data: bytes, t: float) -> None:
        decoded = wire.decode(data)
        if not isinstance(decoded, wire.CommandFrame):
            return
        waypoints = [
            guidance.Waypoint(hour, *frame.to_xy(lat_e7 / 1e7, lon_e7 / 1e7))
            for hour, lat_e7, lon_e7 in decoded.entries
        ]
        world.tracker.replace(waypoints)
        world.applied_mission_version = decoded.seq
        pending_acks.append(decoded.seq)

    for k in range(1, steps + 1):
        t = k * dt
        v = world.vstate

        if not capsize_done and t >= config.capsize_at:
            capsize_done = True
            v = world.vstate = replace(v, roll=math.radians(170.0))

        if k % guidance_every == 0:
            fix = (v.x, v.y)
            capsized = guidance.detect_capsize(
                v.roll, v.pitch_attitude, config.capsize_threshold
            )
            if capsized and not v.capsized:
                v = world.vstate = replace(v, capsized=True)
            active = world.tracker.active(fix, int(t // 3600))
            if active is not None:
                err = wrap_angle(guidance.desired_heading(fix, active) - v.heading)
                rudder_cmd = guidance.heading_controller(
                    err, -v.yaw_rate, config.guidance_kp, config.guidance_kd,
                    limit=specs.rudder.max_angle,
                )
            else:
                rudder_cmd = 0.0

        cmd = vehicle.ActuatorCommand(
            rudder=rudder_cmd,
            thruster_level=thruster_cmd,
            winch=config.winch_command,
        )
        new_state, loads = vehicle.step(v, config.wave, cmd, specs, dt)
        world.vstate = new_state
        _check_finite(
            k, "vehicle",
            surge=new_state.surge_speed, heading=new_state.heading,
            tension=new_state.tether_tension, heave=new_state.heave,
            x=new_state.x, y=new_state.y,
        )
        accel_ring.append(config.wave.acceleration(t))

        solar_w = power.solar_power(irradiance_at(t, config), config.solar)
        load_map = {
            "servo": loads.servo_w,
            "thruster": loads.thruster_w,
            "winch": loads.winch_w,
            "electronics": config.electronics_load,
            "comms": comms_load,
        }
        world.bank, tick = power.mppt_step(
            solar_w, load_map, world.bank, config.mppt, dt, t
        )
        last_tick = tick
        _check_finite(k, "power", soc=tick.soc_after, delta=tick.battery_delta_wh)
        hours = dt / 3600.0
        cum_solar_wh += tick.solar_in_w * hours
        cum_load_wh += tick.delivered_w * hours
        cum_delta_wh += tick.battery_delta_wh

        if k % sample_every == 0:
            ns = world.vstate
            for kind in kinds:
                spec = sensors.SENSOR_CATALOG[kind]
                truth_v = sensors.truth(config.env_fields[kind.value], ns.x, ns.y, t)
                sensor_states[kind], reading = sensors.sample(
                    spec, sensor_states[kind], truth_v, t,
                    rngs[kind] if config.sensors_noise else None,
                )
                latest_readings[kind.value] = reading
            if len(accel_ring) >= guidance.MIN_SEA_STATE_WINDOW:
                sea_state_est = guidance.estimate_sea_state(accel_ring, dt)
            lat, lon = frame.to_latlon(ns.x, ns.y)
            world.logbook.append({
                "t": round(t, 6),
                "kind": "sample",
                "lat": lat,
                "lon": lon,
                "heading_deg": math.degrees(ns.heading),
                "surge": ns.surge_speed,
                "readings": {q: latest_readings[q] for q in sorted(latest_readings)},
                "sea_state_m": sea_state_est,
                "soc": tick.soc_after,
                "tether_n": ns.tether_tension,
            })

        if pending_acks:
            for version in pending_acks:
                world.uplink_seq += 1
                ack = wire.AckFrame(
                    seq=world.uplink_seq, timestamp=int(t), mission_version=version
                )
                emit_uplink(wire.encode(ack), t)
            pending_acks.clear()

        if k % uplink_every == 0:
            ns = world.vstate
            lat, lon = frame.to_latlon(ns.x, ns.y)
            world.uplink_seq += 1
            tele = wire.TelemetryFrame.from_values(
                seq=world.uplink_seq,
                timestamp=t,
                lat_deg=lat,
                lon_deg=lon,
                heading_deg=math.degrees(ns.heading),
                speed_m_s=max(0.0, ns.surge_speed),
                soc_frac=tick.soc_after,
                temperature_c=latest_readings["temperature"],
                conductivity_us=latest_readings["conductivity"],
                dissolved_oxygen_mg_l=latest_readings["dissolved_oxygen"],
                ph=latest_readings["ph"],
                capsized=ns.capsized,
                thruster_on=ns.thruster_on,
                on_backup=tick.on_backup,
                load_shed=tick.load_shed,
            )
            emit_uplink(wire.encode(tele), t)
            world.frames_sent += 1

        if not upload_done and t >= config.mission_upload[0]:
            upload_done = True
            world.store.post_mission(
                config.vehicle_id,
                [(int(h), lat, lon) for h, lat, lon in config.mission_upload[1]],
                t=t,
            )

        world.store.relay_step(t, world.channel)
        for delivery in world.channel.due(t):
            if delivery.direction == UPLINK:
                _station_receive(delivery.data, t)
            else:
                _vehicle_receive(delivery.data, t)

        if k % output_every == 0:
            ns = world.vstate
            lat, lon = frame.to_latlon(ns.x, ns.y)
            pitch_mean = (
                sum(p.angle for p in ns.foil_pitch) / len(ns.foil_pitch)
                if ns.foil_pitch else 0.0
            )
            state_rows.append(",".join(_fmt(x) for x in (
                t, ns.x, ns.y, lat, lon, math.degrees(ns.heading),
                ns.surge_speed, ns.heave, ns.heave_rate,
                math.degrees(ns.rudder_angle), math.degrees(pitch_mean),
                ns.thrust, ns.tether_tension,
                ns.tether_state is vehicle.TetherState.TAUT,
                ns.glider_depth, ns.line_length, sea_state_est,
                world.tracker.arrived_count, tick.soc_after,
                tick.on_backup, ns.capsized, ns.thruster_on,
            )))
            energy_rows.append(",".join(_fmt(x) for x in (
                t, tick.solar_available_w, tick.solar_in_w,
                tick.loads_w.get("servo", 0.0), tick.loads_w.get("thruster", 0.0),
                tick.loads_w.get("winch", 0.0), tick.loads_w.get("electronics", 0.0),
                tick.loads_w.get("comms", 0.0), tick.requested_w, tick.shed_w,
                tick.soc_after, tick.backup_soc_after, tick.on_backup,
                tick.load_shed, cum_solar_wh, cum_load_wh, cum_delta_wh,
            )))
            world.ticks_sampled.append(tick)

    link_rows = []
    for entry in world.channel.log:
        info = ";".join(
            f"{key}={_fmt(entry[key])}"
            for key in ("deliver_at", "cost", "sent_serial")
            if key in entry
        )
        link_rows.append(",".join(_fmt(x) for x in (
            entry["t"], "sat", entry["dir"], entry["event"], entry["size"], info
        )))
    for t_rf, path, direction, reason, size, info in rf_log:
        link_rows.append(",".join(_fmt(x) for x in (
            t_rf, path, direction, reason, size, info
        )))

    header_meta = (
        f"seed={config.seed} dt={_fmt(dt)} duration={_fmt(config.duration)}"
    )
    summary = summarize(
        [r.split(",") for r in state_rows],
        [r.split(",") for r in energy_rows],
        [r.split(",") for r in link_rows],
        meta={"seed": config.seed, "dt": dt, "duration": config.duration},
    )

    world.logbook.close()
    if out_path is not None:
        _write_csv(out_path / "state.csv", STATE_SCHEMA, header_meta,
                   STATE_COLUMNS, state_rows)
        _write_csv(out_path / "energy.csv", ENERGY_SCHEMA, header_meta,
                   ENERGY_COLUMNS, energy_rows)
        _write_csv(out_path / "link.csv", LINK_SCHEMA, header_meta,
                   LINK_COLUMNS, link_rows)
        (out_path / "summary.json").write_bytes(_summary_bytes(summary))

    return RunArtifacts(
        out_dir=out_path,
        summary=summary,
        state_rows=state_rows,
        energy_rows=energy_rows,
        link_rows=link_rows,
        world=world,
    )


def _write_csv(path: Path, schema: str, meta: str, columns: str, rows: list[str]):
    with path.open("w") as fh:
        fh.write(f"# usvsim {schema} {meta}\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(row + "\n")


def _summary_bytes(summary: dict) -> bytes:
    return (json.dumps(summary, sort_keys=True, indent=2) + "\n").encode()


def summarize(state_rows, energy_rows, link_rows, meta: dict) -> dict:
    """Summary statistics from parsed artifact rows (replay-stable)."""
    surge = [float(r[6]) for r in state_rows]
    tension = [float(r[12]) for r in state_rows]
    rudder = [float(r[9]) for r in state_rows]
    thrust = [float(r[11]) for r in state_rows]
    xs = [float(r[1]) for r in state_rows]
    ys = [float(r[2]) for r in state_rows]

    n = len(state_rows)
    half = n // 2
    distance = sum(
        math.hypot(x1 - x0, y1 - y0)
        for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:]))
    )
    up_sent = sum(
        1 for r in link_rows if r[2] == "up" and r[3] in ("send", "delivered")
    )
    up_delivered = sum(
        1 for r in link_rows if r[2] == "up" and r[3] in ("deliver", "delivered")
    )
    down_delivered = sum(1 for r in link_rows if r[2] == "down" and r[3] == "deliver")
    cost = sum(
        float(dict(p.split("=") for p in r[5].split(";") if "=" in p).get("cost", 0))
        for r in link_rows
        if r[1] == "sat" and r[3] == "send"
    )

    summary = {
        "seed": meta["seed"],
        "dt": meta["dt"],
        "duration": meta["duration"],
        "rows": n,
        "mean_surge_speed": (sum(surge) / n) if n else 0.0,
        "max_surge_speed": max(surge, default=0.0),
        "distance_travelled": distance,
        "min_tether_tension": min(tension, default=0.0),
        "max_abs_rudder_deg": max((abs(r) for r in rudder), default=0.0),
        "mean_thrust_last_half": (
            sum(thrust[half:]) / (n - half) if n > half else 0.0
        ),
        "waypoints_arrived": int(state_rows[-1][17]) if n else 0,
        "capsized": bool(int(state_rows[-1][20])) if n else False,
        "final_soc": float(energy_rows[-1][10]) if energy_rows else 0.0,
        "min_soc": min((float(r[10]) for r in energy_rows), default=0.0),
        "cum_solar_wh": float(energy_rows[-1][14]) if energy_rows else 0.0,
        "cum_load_wh": float(energy_rows[-1][15]) if energy_rows else 0.0,
        "cum_battery_delta_wh": float(energy_rows[-1][16]) if energy_rows else 0.0,
        "uplink_frames_sent": up_sent,
        "uplink_frames_delivered": up_delivered,
        "commands_delivered": down_delivered,
        "sat_cost": cost,
    }
    return summary


def _read_artifact_csv(path: Path) -> tuple[dict, list[list[str]]]:
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# usvsim"):
        raise ScenarioError([f"{path}: not a usvsim artifact CSV"])
    meta = {}
    for part in lines[0].split()[4:]:
        if "=" in part:
            key, val = part.split("=", 1)
            meta[key] = val
    return meta, [line.split(",") for line in lines[2:] if line]


def replay(artifacts_dir: str | Path) -> dict:
    """Recompute the summary from an artifact directory's CSVs."""
    d = Path(artifacts_dir)
    meta_raw, state_rows = _read_artifact_csv(d / "state.csv")
    _, energy_rows = _read_artifact_csv(d / "energy.csv")
    _, link_rows = _read_artifact_csv(d / "link.csv")
    meta = {
        "seed": int(meta_raw.get("seed", 0)),
        "dt": float(meta_raw.get("dt", 0.0)),
        "duration": float(meta_raw.get("duration", 0.0)),
    }
    return summarize(state_rows, energy_rows, link_rows, meta)


def sweep(param: str, values: list[float], base_config: ScenarioConfig,
          out_dir: str | Path | None = None) -> list[dict]:
    """One run per parameter value; report cycle-mean thrust and mean speed."""
    if param not in SWEEP_PARAMS:
        raise ScenarioError(
            [f"unknown sweep parameter {param!r}; "
             f"choose from {', '.join(sorted(SWEEP_PARAMS))}"]
        )
    key = SWEEP_PARAMS[param]
    rows = []
    for value in values:
        overrides = dict(base_config.raw)
        overrides[key] = int(value) if key == "foil.count" else value
        cfg = default_config(overrides)
        result = run(cfg)
        rows.append({
            "param": param,
            "value": value,
            "mean_thrust_n": result.summary["mean_thrust_last_half"],
            "mean_speed": result.summary["mean_surge_speed"],
        })
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = [f"# usvsim {SWEEP_SCHEMA} param={param}",
                 "value,mean_thrust_n,mean_speed"]
        lines += [
            ",".join(_fmt(x) for x in (r["value"], r["mean_thrust_n"], r["mean_speed"]))
            for r in rows
        ]
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return rows
