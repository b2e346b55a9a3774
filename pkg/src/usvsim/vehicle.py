"""Coupled surface-float / submerged-glider dynamics.

The float is a perfect wave follower; while the tether is taut the glider is
heaved at the float's rate and its sprung foils convert that motion into
surge thrust. Tension is the glider's static weight-in-water plus the
vertical drag reaction, floored at zero: if it would go negative the tether
goes slack and the glider free-falls until the separation is restored.
Surge, yaw (first-order rudder response) and the winch line are integrated
with semi-implicit Euler on a fixed step.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from . import foils
from .foils import (
    FoilArraySpec,
    PitchState,
    SpringSpec,
    array_thrust,
    foil_thrust,
    passive_pitch_step,
)
from .geo import wrap_angle


@dataclass(frozen=True)
class FloatSpec:
    hull_length: float = 1.2
    hull_separation: float = 0.6     # half the hull length
    mass: float = 20.0
    max_payload: float = 75.0
    net_buoyancy: float = 700.0      # N, positive up
    surge_drag_area: float = 0.55    # m^2, combined float+glider+tether
    surge_drag_coeff: float = 0.9

    def __post_init__(self):
        if self.net_buoyancy <= 0:
            raise ValueError("float net_buoyancy must be positive")


@dataclass(frozen=True)
class GliderSpec:
    frame_dims: tuple[float, float, float] = (0.950, 0.185, 0.020)
    mass: float = 9.0
    net_buoyancy: float = -30.0      # N, sinks
    vertical_drag_area: float = 0.20  # m^2, effective Cd*A
    array: FoilArraySpec = field(default_factory=FoilArraySpec)
    spring: SpringSpec = field(default_factory=SpringSpec)

    def __post_init__(self):
        if self.net_buoyancy >= 0:
            raise ValueError("glider net_buoyancy must be negative")


class TetherState(Enum):
    TAUT = "taut"
    SLACK = "slack"


@dataclass(frozen=True)
class TetherSpec:
    length: float = 5.0


@dataclass(frozen=True)
class RudderSpec:
    height: float = 0.090
    chord: float = 0.130
    max_angle: float = math.radians(35.0)
    servo_rate: float = 1.0          # rad/s


@dataclass(frozen=True)
class WinchSpec:
    rated_power: float = 1800.0      # W
    rated_pull: float = 900.0        # kg-force
    line_speed: float = 0.1          # m/s
    efficiency: float = 0.6


@dataclass(frozen=True)
class ThrusterSpec:
    max_force: float = 20.0          # N
    max_power: float = 120.0         # W


@dataclass(frozen=True)
class YawSpec:
    """First-order heading response: r tracks K*v^2*sin(rudder)."""

    gain: float = 0.4                # 1/s per rad of rudder at 1 m/s
    time_constant: float = 3.0       # s


@dataclass(frozen=True)
class ElectricalSpec:
    electronics_w: float = 6.0
    servo_idle_w: float = 0.5
    servo_active_w: float = 2.5


@dataclass(frozen=True)
class VehicleSpecs:
    float_: FloatSpec = field(default_factory=FloatSpec)
    glider: GliderSpec = field(default_factory=GliderSpec)
    tether: TetherSpec = field(default_factory=TetherSpec)
    rudder: RudderSpec = field(default_factory=RudderSpec)
    winch: WinchSpec = field(default_factory=WinchSpec)
    thruster: ThrusterSpec = field(default_factory=ThrusterSpec)
    yaw: YawSpec = field(default_factory=YawSpec)
    electrical: ElectricalSpec = field(default_factory=ElectricalSpec)
    water_density: float = foils.WATER_DENSITY
    pitch_inertia: float = foils.DEFAULT_PITCH_INERTIA
    upper_stop: float = foils.UPPER_STOP
    lower_stop: float = foils.LOWER_STOP
    current: tuple[float, float] = (0.0, 0.0)   # ambient drift, m/s

    @property
    def total_mass(self) -> float:
        return self.float_.mass + self.glider.mass


class WinchDirection(Enum):
    HOLD = "hold"
    RETRACT = "retract"
    DEPLOY = "deploy"


@dataclass(frozen=True)
class ActuatorCommand:
    rudder: float = 0.0              # commanded rudder angle, rad
    thruster_level: float = 0.0      # [0, 1]
    winch: WinchDirection = WinchDirection.HOLD


@dataclass(frozen=True)
class WaveSpec:
    """Superposition of regular components; amplitude 0 is a flat sea."""

    components: tuple[tuple[float, float, float], ...] = ((0.25, 4.0, 0.0),)

    @classmethod
    def regular(cls, amplitude: float, period: float, phase: float = 0.0) -> "WaveSpec":
        if amplitude == 0.0:
            return cls(components=())
        return cls(components=((amplitude, period, phase),))

    def elevation(self, t: float) -> float:
        return sum(a * math.sin(math.tau * t / p + ph) for a, p, ph in self.components)

    def rate(self, t: float) -> float:
        return sum(
            a * (math.tau / p) * math.cos(math.tau * t / p + ph)
            for a, p, ph in self.components
        )

    def acceleration(self, t: float) -> float:
        return sum(
            -a * (math.tau / p) ** 2 * math.sin(math.tau * t / p + ph)
            for a, p, ph in self.components
        )


@dataclass(frozen=True)
class VehicleState:
    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    yaw_rate: float = 0.0
    surge_speed: float = 0.0
    heave: float = 0.0
    heave_rate: float = 0.0
    roll: float = 0.0
    pitch_attitude: float = 0.0
    rudder_angle: float = 0.0
    foil_pitch: tuple[PitchState, ...] = ()
    tether_tension: float = 0.0
    tether_state: TetherState = TetherState.TAUT
    glider_depth: float = 5.0        # separation between float and glider, m
    line_length: float = 5.0         # tether paid out by the winch, m
    glider_heave_rate: float = 0.0   # glider's own rate while slack
    thrust: float = 0.0              # total array thrust this step, N
    thruster_on: bool = False
    capsized: bool = False


@dataclass(frozen=True)
class ActuatorLoads:
    """Electrical draw of the actuators over one step, W."""

    servo_w: float = 0.0
    thruster_w: float = 0.0
    winch_w: float = 0.0


def initial_state(specs: VehicleSpecs, heading: float = 0.0,
                  x: float = 0.0, y: float = 0.0) -> VehicleState:
    pitches = tuple(PitchState() for _ in range(specs.glider.array.count))
    return VehicleState(
        heading=wrap_angle(heading), x=x, y=y, foil_pitch=pitches,
        tether_tension=abs(specs.glider.net_buoyancy),
        glider_depth=specs.tether.length, line_length=specs.tether.length,
    )


def thruster_force(cmd_level: float, spec: ThrusterSpec) -> tuple[float, float]:
    """Force (linear in level) and electrical power (cubic, propeller affinity)."""
    if not 0.0 <= cmd_level <= 1.0:
        raise ValueError("thruster level must lie in [0, 1]")
    return cmd_level * spec.max_force, cmd_level**3 * spec.max_power


def winch_step(
    depth: float,
    direction: WinchDirection,
    spec: WinchSpec,
    dt: float,
    *,
    max_depth: float = 5.0,
    load_n: float = 30.0,
) -> tuple[float, float]:
    """Move the line toward an end stop and report the electrical draw.

    Holding draws nothing (self-locking gear); moving draws load * speed /
    efficiency, capped at the rated power, and zero once clamped at a stop.
    """
    if not 0.0 <= depth <= max_depth:
        raise ValueError(f"winch line length {depth} outside [0, {max_depth}]")
    if direction is WinchDirection.HOLD:
        return depth, 0.0
    target = 0.0 if direction is WinchDirection.RETRACT else max_depth
    step = spec.line_speed * dt
    delta = target - depth
    if delta == 0.0:
        return depth, 0.0
    move = math.copysign(min(abs(delta), step), delta)
    power = min(spec.rated_power, load_n * spec.line_speed / spec.efficiency)
    return depth + move, power


def step(
    state: VehicleState,
    wave: WaveSpec,
    cmd: ActuatorCommand,
    specs: VehicleSpecs,
    dt: float,
) -> tuple[VehicleState, ActuatorLoads]:
    """Advance the coupled system by one fixed step.

    Order: wave kinematics, rudder slew, passive foil pitch + thrust, surge,
    yaw, planar kinematics, winch, tether/glider vertical coupling.
    """
    if not 0.0 < dt <= 0.05:
        raise ValueError("dt must lie in (0, 0.05] s")

    t_new = state.t + dt
    heave = wave.elevation(t_new)
    heave_rate = wave.rate(t_new)

    # Rudder slews toward the command at the servo rate, inside travel limits.
    rudder_cmd = min(specs.rudder.max_angle, max(-specs.rudder.max_angle, cmd.rudder))
    max_slew = specs.rudder.servo_rate * dt
    delta = rudder_cmd - state.rudder_angle
    rudder = state.rudder_angle + math.copysign(min(abs(delta), max_slew), delta)
    servo_active = abs(delta) > 1e-9

    # Glider vertical motion: follows the float while taut, free-falls while
    # slack. The taut-side tension check below decides transitions.
    taut = state.tether_state is TetherState.TAUT
    glider_rate = heave_rate if taut else state.glider_heave_rate

    # Passive foil pitch and per-foil thrust at the glider's flow state.
    # All foils see the same flow; identical states share one integration.
    n_foils = len(state.foil_pitch)
    new_pitches: list[PitchState] = []
    thrust_sum = 0.0
    cache: dict[tuple[float, float], tuple[PitchState, float]] = {}
    for ps in state.foil_pitch:
        key = (ps.angle, ps.angular_rate)
        hit = cache.get(key)
        if hit is None:
            ps2 = passive_pitch_step(
                ps, glider_rate, state.surge_speed, specs.glider.spring,
                specs.glider.array.foil, dt,
                inertia=specs.pitch_inertia,
                upper_stop=specs.upper_stop,
                lower_stop=specs.lower_stop,
                water_density=specs.water_density,
            )
            thrust = foil_thrust(
                ps2.angle, glider_rate, state.surge_speed,
                specs.glider.array.foil, specs.water_density,
            )
            hit = (ps2, thrust)
            cache[key] = hit
        new_pitches.append(hit[0])
        thrust_sum += hit[1]
    per_foil_mean = thrust_sum / n_foils if n_foils else 0.0
    t_foils = array_thrust(per_foil_mean, specs.glider.array) if n_foils else 0.0

    t_thruster, p_thruster = thruster_force(cmd.thruster_level, specs.thruster)

    # Surge: m v' = T_foils + T_thruster - 0.5 rho Cd A v|v|
    v = state.surge_speed
    drag = (
        0.5 * specs.water_density * specs.float_.surge_drag_coeff
        * specs.float_.surge_drag_area * v * abs(v)
    )
    v += dt * (t_foils + t_thruster - drag) / specs.total_mass

    # Yaw: first-order response toward K * v^2 * sin(rudder).
    r_target = specs.yaw.gain * v * v * math.sin(rudder)
    yaw_rate = state.yaw_rate + dt * (r_target - state.yaw_rate) / specs.yaw.time_constant
    heading = wrap_angle(state.heading + dt * yaw_rate)

    x = state.x + dt * (v * math.cos(heading) + specs.current[0])
    y = state.y + dt * (v * math.sin(heading) + specs.current[1])

    line_length, winch_w = state.line_length, 0.0
    if cmd.winch is not WinchDirection.HOLD:
        line_length, winch_w = winch_step(
            state.line_length, cmd.winch, specs.winch, dt,
            max_depth=specs.tether.length,
            load_n=abs(specs.glider.net_buoyancy),
        )

    # Tether coupling. Taut: tension = |net buoyancy| + vertical drag
    # reaction of the dragged glider, floored at zero; a negative raw value
    # means the float is outrunning the sinking glider downward -> slack.
    buoy = abs(specs.glider.net_buoyancy)
    cda = specs.glider.vertical_drag_area
    if taut:
        drag_reaction = (
            0.5 * specs.water_density * cda * heave_rate * abs(heave_rate)
        )
        raw_tension = buoy + drag_reaction
        if raw_tension >= 0.0:
            tension = raw_tension
            tether_state = TetherState.TAUT
            separation = line_length
            glider_heave_rate = heave_rate
        else:
            tension = 0.0
            tether_state = TetherState.SLACK
            separation = min(state.glider_depth, line_length)
            glider_heave_rate = heave_rate
    else:
        # Slack: glider sinks under net buoyancy against vertical drag while
        # the float rides the wave; separation grows back toward the line.
        w = state.glider_heave_rate
        accel = (
            specs.glider.net_buoyancy
            - 0.5 * specs.water_density * cda * w * abs(w)
        ) / specs.glider.mass
        w += dt * accel
        separation = state.glider_depth + dt * (heave_rate - w)
        glider_heave_rate = w
        tension = 0.0
        tether_state = TetherState.SLACK
        if separation >= line_length:
            separation = line_length
            tether_state = TetherState.TAUT
            glider_heave_rate = heave_rate
            tension = max(
                0.0,
                buoy + 0.5 * specs.water_density * cda * heave_rate * abs(heave_rate),
            )
    separation = min(max(separation, 0.0), line_length)

    loads = ActuatorLoads(
        servo_w=(specs.electrical.servo_active_w if servo_active
                 else specs.electrical.servo_idle_w),
        thruster_w=p_thruster,
        winch_w=winch_w,
    )
    new_state = replace(
        state,
        t=t_new,
        x=x,
        y=y,
        heading=heading,
        yaw_rate=yaw_rate,
        surge_speed=v,
        heave=heave,
        heave_rate=heave_rate,
        rudder_angle=rudder,
        foil_pitch=tuple(new_pitches),
        tether_tension=tension,
        tether_state=tether_state,
        glider_depth=separation,
        line_length=line_length,
        glider_heave_rate=glider_heave_rate,
        thrust=t_foils,
        thruster_on=cmd.thruster_level > 0.0,
    )
    return new_state, loads
