"""Scenario configuration: flat dotted-key text files with strict validation.

One `key = value` per line, `#` starts a comment, blank lines ignored.
Unknown keys are rejected; every violation in a file is reported at once,
each naming the offending key. Angles are written in degrees, times in
seconds, positions in geodetic degrees (converted to the local planar frame
at the configured origin).
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import foils, power, sensors, vehicle
from .links import RfLinkSpec, SatLinkSpec, WindowSchedule

DEG = math.pi / 180.0


class ScenarioError(Exception):
    """Carries every validation problem found in a scenario file."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_triples(text: str) -> list[tuple[float, float, float]]:
    """Parse 'a:b:c;a:b:c;...' into float triples."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected three ':'-separated fields in {chunk!r}")
        out.append(tuple(float(p) for p in parts))
    return out


def _parse_span(text: str) -> tuple[float, float] | None:
    text = text.strip()
    if not text:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected 'start:end', got {text!r}")
    start, end = float(parts[0]), float(parts[1])
    if end <= start:
        raise ValueError("span end must be after start")
    return start, end


def _parse_upload(text: str) -> tuple[float, list[tuple[float, float, float]]] | None:
    """Parse 't@hour:lat:lon;hour:lat:lon;...' into an upload event."""
    text = text.strip()
    if not text:
        return None
    if "@" not in text:
        raise ValueError("expected 't@waypoints'")
    t_part, wp_part = text.split("@", 1)
    return float(t_part), _parse_triples(wp_part)


@dataclass(frozen=True)
class _Key:
    parse: callable
    default: object
    check: callable = None
    why: str = ""


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _frac(v):
    return 0.0 <= v <= 1.0


_KEYS: dict[str, _Key] = {
    "seed": _Key(int, 0, _nonneg, "must be >= 0"),
    "duration": _Key(float, 3600.0, _nonneg, "must be >= 0"),
    "dt": _Key(float, 0.02, lambda v: 0.0 < v <= 0.05, "must lie in (0, 0.05]"),
    "output.cadence": _Key(float, 1.0, _pos, "must be positive"),
    "vehicle.id": _Key(str, "usv-1"),
    "vehicle.initial_x": _Key(float, 0.0),
    "vehicle.initial_y": _Key(float, 0.0),
    "vehicle.initial_heading_deg": _Key(float, 0.0),
    "origin.lat": _Key(float, 59.91, lambda v: -90 <= v <= 90, "must be a latitude"),
    "origin.lon": _Key(float, 10.75, lambda v: -180 <= v <= 180, "must be a longitude"),
    "wave.amplitude": _Key(float, 0.25, _nonneg, "must be >= 0"),
    "wave.period": _Key(float, 4.0, _pos, "must be positive"),
    "wave.spectrum": _Key(_parse_triples, []),
    "current.x": _Key(float, 0.0),
    "current.y": _Key(float, 0.0),
    "irradiance.peak": _Key(float, 1.0, _frac, "must lie in [0, 1]"),
    "irradiance.day_length": _Key(float, 43200.0, _pos, "must be positive"),
    "irradiance.dawn": _Key(float, 21600.0, _nonneg, "must be >= 0"),
    "water.density": _Key(float, 1025.0, _pos, "must be positive"),
    "float.hull_length": _Key(float, 1.2, _pos, "must be positive"),
    "float.hull_separation": _Key(float, 0.6, _pos, "must be positive"),
    "float.mass": _Key(float, 20.0, _pos, "must be positive"),
    "float.max_payload": _Key(float, 75.0, _pos, "must be positive"),
    "float.net_buoyancy": _Key(float, 700.0, _pos, "must be positive"),
    "float.surge_drag_area": _Key(float, 0.55, _pos, "must be positive"),
    "float.surge_drag_coeff": _Key(float, 0.9, _pos, "must be positive"),
    "glider.mass": _Key(float, 9.0, _pos, "must be positive"),
    "glider.net_buoyancy": _Key(float, -30.0, lambda v: v < 0, "must be negative"),
    "glider.vertical_drag_area": _Key(float, 0.20, _pos, "must be positive"),
    "tether.length": _Key(float, 5.0, _pos, "must be positive"),
    "rudder.height": _Key(float, 0.090, _pos, "must be positive"),
    "rudder.chord": _Key(float, 0.130, _pos, "must be positive"),
    "rudder.max_angle_deg": _Key(float, 35.0, _pos, "must be positive"),
    "rudder.servo_rate": _Key(float, 1.0, _pos, "must be positive"),
    "winch.rated_power": _Key(float, 1800.0, _pos, "must be positive"),
    "winch.rated_pull": _Key(float, 900.0, _pos, "must be positive"),
    "winch.line_speed": _Key(float, 0.1, _pos, "must be positive"),
    "winch.command": _Key(str, "hold",
                          lambda v: v in ("hold", "retract", "deploy"),
                          "must be hold, retract or deploy"),
    "thruster.max_force": _Key(float, 20.0, _nonneg, "must be >= 0"),
    "thruster.max_power": _Key(float, 120.0, _nonneg, "must be >= 0"),
    "thruster.level": _Key(float, 0.0, _frac, "must lie in [0, 1]"),
    "foil.chord": _Key(float, 0.12, _pos, "must be positive"),
    "foil.span": _Key(float, 0.325, _pos, "must be positive"),
    "foil.zero_lift_drag": _Key(float, 0.01, _nonneg, "must be >= 0"),
    "foil.stall_angle_deg": _Key(float, 25.0, lambda v: 0 < v < 90,
                                 "must lie in (0, 90)"),
    "foil.count": _Key(int, 6, _nonneg, "must be >= 0"),
    "foil.spacing": _Key(float, 0.012, _pos, "must be positive"),
    "foil.reference_spacing": _Key(float, 0.012, _pos, "must be positive"),
    "foil.interference_gain": _Key(float, 0.35, _nonneg, "must be >= 0"),
    "foil.spacing_exponent": _Key(float, 0.25, _nonneg, "must be >= 0"),
    "foil.pitch_inertia": _Key(float, 0.002, _pos, "must be positive"),
    "foil.upper_stop_deg": _Key(float, 20.0, lambda v: 0 < v <= 90,
                                "must lie in (0, 90]"),
    "foil.lower_stop_deg": _Key(float, -90.0, lambda v: -90 <= v < 0,
                                "must lie in [-90, 0)"),
    "spring.rate": _Key(float, 1.178, _pos, "must be positive"),
    "spring.lever_arm": _Key(float, 0.02, _pos, "must be positive"),
    "spring.damping": _Key(float, 0.05, _nonneg, "must be >= 0"),
    "yaw.gain": _Key(float, 0.4, _pos, "must be positive"),
    "yaw.time_constant": _Key(float, 3.0, _pos, "must be positive"),
    "power.panel_count": _Key(int, 3, _pos, "must be positive"),
    "power.panel_voltage": _Key(float, 18.0, _pos, "must be positive"),
    "power.panel_peak": _Key(float, 30.0, _nonneg, "must be >= 0"),
    "power.diode_drop": _Key(float, 0.4, _nonneg, "must be >= 0"),
    "power.mppt_efficiency": _Key(float, 0.95, lambda v: 0 < v <= 1,
                                  "must lie in (0, 1]"),
    "power.load_limit": _Key(float, 30.0, _pos, "must be positive"),
    "power.capacity_ah": _Key(float, 43.2, _pos, "must be positive"),
    "power.voltage": _Key(float, 11.1, _pos, "must be positive"),
    "power.charge_efficiency": _Key(float, 1.0, lambda v: 0 < v <= 1,
                                    "must lie in (0, 1]"),
    "power.initial_soc": _Key(float, 0.9, _frac, "must lie in [0, 1]"),
    "power.backup_soc": _Key(float, 1.0, _frac, "must lie in [0, 1]"),
    "power.electronics_load": _Key(float, 6.0, _nonneg, "must be >= 0"),
    "power.servo_idle_load": _Key(float, 0.5, _nonneg, "must be >= 0"),
    "power.servo_active_load": _Key(float, 2.5, _nonneg, "must be >= 0"),
    "sensors.sample_period": _Key(float, 1.0, _pos, "must be positive"),
    "sensors.noise": _Key(_parse_bool, True),
    "guidance.kp": _Key(float, 0.6, _nonneg, "must be >= 0"),
    "guidance.kd": _Key(float, 1.2, _nonneg, "must be >= 0"),
    "guidance.arrival_radius": _Key(float, 25.0, _pos, "must be positive"),
    "guidance.capsize_threshold_deg": _Key(float, 90.0, _pos, "must be positive"),
    "guidance.update_period": _Key(float, 1.0, _pos, "must be positive"),
    "comms.cadence": _Key(float, 600.0, _pos, "must be positive"),
    "comms.idle_load": _Key(float, 0.3, _nonneg, "must be >= 0"),
    "comms.message_energy": _Key(float, 30.0, _nonneg, "must be >= 0"),
    "sat.uplink_mtu": _Key(int, 340, _pos, "must be positive"),
    "sat.downlink_mtu": _Key(int, 270, _pos, "must be positive"),
    "sat.latency": _Key(float, 60.0, _nonneg, "must be >= 0"),
    "sat.cost": _Key(float, 1.0, _nonneg, "must be >= 0"),
    "sat.window_period": _Key(float, 0.0, _nonneg, "must be >= 0"),
    "sat.window_open": _Key(float, 0.0, _nonneg, "must be >= 0"),
    "sat.window_phase": _Key(float, 0.0, _nonneg, "must be >= 0"),
    "rf.max_range": _Key(float, 2000.0, _pos, "must be positive"),
    "rf.key": _Key(str, "00112233445566778899aabbccddeeff"),
    "mission.waypoints": _Key(_parse_triples, []),
    "events.capsize_at": _Key(str, ""),
    "events.link_outage": _Key(_parse_span, None),
    "events.mission_upload": _Key(_parse_upload, None),
}

# Environmental truth fields share one key shape per quantity.
_ENV_DEFAULTS = {
    "temperature": {"base": 12.0, "diurnal": 0.5},
    "conductivity": {"base": 50000.0, "diurnal": 0.0},
    "dissolved_oxygen": {"base": 8.0, "diurnal": 0.0},
    "ph": {"base": 8.1, "diurnal": 0.0},
}
for _q, _d in _ENV_DEFAULTS.items():
    _KEYS[f"env.{_q}.base"] = _Key(float, _d["base"])
    _KEYS[f"env.{_q}.gradient_x"] = _Key(float, 0.0)
    _KEYS[f"env.{_q}.gradient_y"] = _Key(float, 0.0)
    _KEYS[f"env.{_q}.diurnal"] = _Key(float, _d["diurnal"], _nonneg, "must be >= 0")
    _KEYS[f"env.{_q}.noise"] = _Key(float, 0.0, _nonneg, "must be >= 0")


@dataclass
class ScenarioConfig:
    """Fully validated run configuration with constructed spec objects."""

    raw: dict
    seed: int
    duration: float
    dt: float
    output_cadence: float
    vehicle_id: str
    initial_x: float
    initial_y: float
    initial_heading: float
    origin_lat: float
    origin_lon: float
    wave: vehicle.WaveSpec
    irradiance_peak: float
    irradiance_day_length: float
    irradiance_dawn: float
    specs: vehicle.VehicleSpecs
    solar: power.SolarArraySpec
    mppt: power.MpptSpec
    bank: power.BatteryBank
    electronics_load: float
    comms_cadence: float
    comms_idle_load: float
    comms_message_energy: float
    env_fields: dict
    sensors_sample_period: float
    sensors_noise: bool
    guidance_kp: float
    guidance_kd: float
    arrival_radius: float
    capsize_threshold: float
    guidance_update_period: float
    sat: SatLinkSpec
    rf: RfLinkSpec
    mission: list
    thruster_level: float
    winch_command: vehicle.WinchDirection
    capsize_at: float | None
    mission_upload: tuple | None

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def parse_text(text: str, source: str = "<string>") -> dict:
    """Parse the dotted key-value grammar; collect every problem."""
    problems: list[str] = []
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            problems.append(f"{source}:{lineno}: expected 'key = value'")
            continue
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEYS:
            problems.append(f"{source}:{lineno}: unknown key {key}")
            continue
        if key in raw:
            problems.append(f"{source}:{lineno}: duplicate key {key}")
            continue
        try:
            raw[key] = _KEYS[key].parse(value)
        except ValueError as exc:
            problems.append(f"{source}:{lineno}: {key}: {exc}")
    if problems:
        raise ScenarioError(problems)
    return raw


def build_config(raw: dict) -> ScenarioConfig:
    """Validate a raw key dict against every invariant and assemble specs."""
    problems: list[str] = []
    values: dict[str, object] = {}
    for key, spec in _KEYS.items():
        v = raw.get(key, spec.default)
        if spec.check is not None and v is not None and not spec.check(v):
            problems.append(f"{key}: {spec.why} (got {v!r})")
        values[key] = v

    dt = values["dt"]
    duration = values["duration"]
    if dt > 0 and duration >= 0:
        steps = duration / dt
        if abs(steps - round(steps)) > 1e-9:
            problems.append("duration: must be an integer number of dt steps")
        cad = values["output.cadence"] / dt
        if abs(cad - round(cad)) > 1e-9 or round(cad) < 1:
            problems.append("output.cadence: must be a positive multiple of dt")

    capsize_at: float | None = None
    if str(values["events.capsize_at"]).strip():
        try:
            capsize_at = float(values["events.capsize_at"])
        except ValueError:
            problems.append("events.capsize_at: must be a time in seconds")

    try:
        rf_key = bytes.fromhex(values["rf.key"])
        if len(rf_key) != 16:
            problems.append("rf.key: must be 16 bytes of hex")
    except ValueError:
        problems.append("rf.key: must be hexadecimal")
        rf_key = b"\x00" * 16

    mission = []
    for hour, lat, lon in values["mission.waypoints"]:
        if hour < 0 or hour != int(hour):
            problems.append("mission.waypoints: hour indices must be non-negative integers")
            break
        mission.append((int(hour), lat, lon))
    hours = [wp[0] for wp in mission]
    if hours != sorted(hours) or len(set(hours)) != len(hours):
        problems.append("mission.waypoints: hours must be strictly increasing")
    if len(mission) > 25:
        problems.append("mission.waypoints: at most 25 waypoints per command")

    if values["sat.window_period"] > 0 and not (
        0 < values["sat.window_open"] <= values["sat.window_period"]
    ):
        problems.append("sat.window_open: must lie in (0, sat.window_period]")

    if problems:
        raise ScenarioError(sorted(problems))

    foil = foils.FoilSpec(
        chord=values["foil.chord"],
        span=values["foil.span"],
        zero_lift_drag_coeff=values["foil.zero_lift_drag"],
        stall_angle=values["foil.stall_angle_deg"] * DEG,
    )
    array = foils.FoilArraySpec(
        foil=foil,
        count=values["foil.count"],
        spacing=values["foil.spacing"],
        interference_gain_a=values["foil.interference_gain"],
        spacing_exponent_beta=values["foil.spacing_exponent"],
        reference_spacing=values["foil.reference_spacing"],
    )
    spring = foils.SpringSpec(
        rate=values["spring.rate"],
        lever_arm=values["spring.lever_arm"],
        damping=values["spring.damping"],
    )
    specs = vehicle.VehicleSpecs(
        float_=vehicle.FloatSpec(
            hull_length=values["float.hull_length"],
            hull_separation=values["float.hull_separation"],
            mass=values["float.mass"],
            max_payload=values["float.max_payload"],
            net_buoyancy=values["float.net_buoyancy"],
            surge_drag_area=values["float.surge_drag_area"],
            surge_drag_coeff=values["float.surge_drag_coeff"],
        ),
        glider=vehicle.GliderSpec(
            mass=values["glider.mass"],
            net_buoyancy=values["glider.net_buoyancy"],
            vertical_drag_area=values["glider.vertical_drag_area"],
            array=array,
            spring=spring,
        ),
        tether=vehicle.TetherSpec(length=values["tether.length"]),
        rudder=vehicle.RudderSpec(
            height=values["rudder.height"],
            chord=values["rudder.chord"],
            max_angle=values["rudder.max_angle_deg"] * DEG,
            servo_rate=values["rudder.servo_rate"],
        ),
        winch=vehicle.WinchSpec(
            rated_power=values["winch.rated_power"],
            rated_pull=values["winch.rated_pull"],
            line_speed=values["winch.line_speed"],
        ),
        thruster=vehicle.ThrusterSpec(
            max_force=values["thruster.max_force"],
            max_power=values["thruster.max_power"],
        ),
        yaw=vehicle.YawSpec(
            gain=values["yaw.gain"],
            time_constant=values["yaw.time_constant"],
        ),
        electrical=vehicle.ElectricalSpec(
            electronics_w=values["power.electronics_load"],
            servo_idle_w=values["power.servo_idle_load"],
            servo_active_w=values["power.servo_active_load"],
        ),
        water_density=values["water.density"],
        pitch_inertia=values["foil.pitch_inertia"],
        upper_stop=values["foil.upper_stop_deg"] * DEG,
        lower_stop=values["foil.lower_stop_deg"] * DEG,
        current=(values["current.x"], values["current.y"]),
    )

    if values["wave.spectrum"]:
        wave = vehicle.WaveSpec(components=tuple(
            (a, p, ph) for a, p, ph in values["wave.spectrum"]
        ))
        for a, p, _ in values["wave.spectrum"]:
            if a < 0 or p <= 0:
                raise ScenarioError(
                    ["wave.spectrum: amplitudes must be >= 0 and periods positive"]
                )
    else:
        wave = vehicle.WaveSpec.regular(values["wave.amplitude"], values["wave.period"])

    outages = ()
    if values["events.link_outage"] is not None:
        outages = (values["events.link_outage"],)
    sat = SatLinkSpec(
        uplink_mtu=values["sat.uplink_mtu"],
        downlink_mtu=values["sat.downlink_mtu"],
        latency=values["sat.latency"],
        per_message_cost=values["sat.cost"],
        windows=WindowSchedule(
            period=values["sat.window_period"],
            open_duration=values["sat.window_open"],
            phase=values["sat.window_phase"],
            outages=outages,
        ),
    )

    env_fields = {}
    for q in _ENV_DEFAULTS:
        env_fields[q] = sensors.EnvFieldSpec(
            base=values[f"env.{q}.base"],
            gradient_x=values[f"env.{q}.gradient_x"],
            gradient_y=values[f"env.{q}.gradient_y"],
            diurnal_amplitude=values[f"env.{q}.diurnal"],
            noise_amplitude=values[f"env.{q}.noise"],
            seed=values["seed"],
        )

    return ScenarioConfig(
        raw=dict(values),
        seed=values["seed"],
        duration=duration,
        dt=dt,
        output_cadence=values["output.cadence"],
        vehicle_id=values["vehicle.id"],
        initial_x=values["vehicle.initial_x"],
        initial_y=values["vehicle.initial_y"],
        initial_heading=values["vehicle.initial_heading_deg"] * DEG,
        origin_lat=values["origin.lat"],
        origin_lon=values["origin.lon"],
        wave=wave,
        irradiance_peak=values["irradiance.peak"],
        irradiance_day_length=values["irradiance.day_length"],
        irradiance_dawn=values["irradiance.dawn"],
        specs=specs,
        solar=power.SolarArraySpec(
            panel_count=values["power.panel_count"],
            panel_open_voltage=values["power.panel_voltage"],
            panel_peak_power=values["power.panel_peak"],
            diode_drop=values["power.diode_drop"],
        ),
        mppt=power.MpptSpec(
            conversion_efficiency=values["power.mppt_efficiency"],
            load_current_limit=values["power.load_limit"],
        ),
        bank=power.BatteryBank(
            total_capacity_ah=values["power.capacity_ah"],
            nominal_voltage=values["power.voltage"],
            soc=values["power.initial_soc"],
            backup_soc=values["power.backup_soc"],
            charge_efficiency=values["power.charge_efficiency"],
        ),
        electronics_load=values["power.electronics_load"],
        comms_cadence=values["comms.cadence"],
        comms_idle_load=values["comms.idle_load"],
        comms_message_energy=values["comms.message_energy"],
        env_fields=env_fields,
        sensors_sample_period=values["sensors.sample_period"],
        sensors_noise=values["sensors.noise"],
        guidance_kp=values["guidance.kp"],
        guidance_kd=values["guidance.kd"],
        arrival_radius=values["guidance.arrival_radius"],
        capsize_threshold=values["guidance.capsize_threshold_deg"] * DEG,
        guidance_update_period=values["guidance.update_period"],
        sat=sat,
        rf=RfLinkSpec(max_range=values["rf.max_range"], key=rf_key),
        mission=mission,
        thruster_level=values["thruster.level"],
        winch_command=vehicle.WinchDirection(values["winch.command"]),
        capsize_at=capsize_at,
        mission_upload=values["events.mission_upload"],
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file (missing file is its own error)."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError([f"scenario file not found: {path}"])
    raw = parse_text(path.read_text(), source=str(path))
    return build_config(raw)


def default_config(overrides: dict | None = None) -> ScenarioConfig:
    """Programmatic scenario: defaults plus already-parsed key overrides."""
    raw = {}
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ScenarioError([f"unknown key {key}"])
        raw[key] = value
    return build_config(raw)
