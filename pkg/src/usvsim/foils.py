"""Passive flapping-foil propulsion model.

A symmetric foil on a sprung pivot pitches passively between hard stops as
the submerged frame is heaved through the water; the resulting lift, resolved
through the instantaneous inflow angle, has a forward component. Six foils
act together with an interference gain and a spacing penalty.

Sign conventions used throughout:
  - heave_rate is the vertical velocity of the foil frame, positive up;
  - the inflow angle is phi = atan2(-heave_rate, surge_speed), so a
    downstroke gives phi > 0;
  - pitch follows the same sense as phi: the hydrodynamic moment rotates the
    foil toward phi, the spring pulls it back to neutral. The operational
    stop at +20 deg is therefore reached on the downstroke, and the -90 deg
    relief stop lets the foil feather vertical on a violent upstroke.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

WATER_DENSITY = 1025.0  # kg/m^3, seawater

# Thin-foil lift model constants (artifact model, config-exposed per spec type)
OSWALD_EFFICIENCY = 0.9

DEG = math.pi / 180.0


class StopContact(Enum):
    FREE = "free"
    UPPER_STOP = "upper_stop"
    LOWER_STOP = "lower_stop"


@dataclass(frozen=True)
class FoilSpec:
    """Geometry and stall behaviour of one symmetric foil."""

    chord: float = 0.12
    span: float = 0.325
    planform_area: float | None = None
    zero_lift_drag_coeff: float = 0.01
    stall_angle: float = 25.0 * DEG
    post_stall_residual: float = 0.2   # fraction of stall cl left at 90 deg
    flat_plate_drag: float = 1.8       # cd at 90 deg incidence

    def __post_init__(self):
        if self.chord <= 0 or self.span <= 0:
            raise ValueError("chord and span must be positive")
        area = self.chord * self.span
        if self.planform_area is None:
            object.__setattr__(self, "planform_area", area)
        elif abs(self.planform_area - area) > 1e-12 * max(area, 1e-300):
            raise ValueError("planform_area must equal chord * span")
        if not 0 < self.stall_angle < math.pi / 2:
            raise ValueError("stall_angle must lie in (0, 90) deg")

    @property
    def aspect_ratio(self) -> float:
        return self.span / self.chord


@dataclass(frozen=True)
class FoilArraySpec:
    """The multi-foil arrangement: count, spacing and interference model."""

    foil: FoilSpec = field(default_factory=FoilSpec)
    count: int = 6
    spacing: float = 0.012
    interference_gain_a: float = 0.35
    spacing_exponent_beta: float = 0.25
    reference_spacing: float = 0.012

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.spacing <= 0 or self.reference_spacing <= 0:
            raise ValueError("spacing must be positive")


@dataclass(frozen=True)
class SpringSpec:
    """Extension spring acting on the pitch shaft through a lever arm."""

    rate: float = 1.178          # N/mm
    neutral_angle: float = 0.0   # rad, wing horizontal
    lever_arm: float = 0.02      # m, spring eye offset from the pivot
    damping: float = 0.05        # N*m*s/rad, pivot damping

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("spring rate must be positive")

    @property
    def torsional_stiffness(self) -> float:
        """Equivalent torsional stiffness in N*m/rad (rate N/mm -> N/m)."""
        return self.rate * 1000.0 * self.lever_arm ** 2


@dataclass(frozen=True)
class PitchState:
    angle: float = 0.0
    angular_rate: float = 0.0
    at_stop: StopContact = StopContact.FREE


UPPER_STOP = 20.0 * DEG    # operational stop, reached on the downstroke
LOWER_STOP = -90.0 * DEG   # relief stop, foil feathers vertical on upstroke

DEFAULT_PITCH_INERTIA = 0.002      # kg*m^2
DEFAULT_MOMENT_ARM_FRAC = 0.25     # hydrodynamic centre offset, fraction of chord


def lift_drag_coefficients(alpha: float, spec: FoilSpec) -> tuple[float, float]:
    """Lift and drag coefficients of the symmetric foil at incidence alpha.

    Pre-stall the lift follows 2*pi*sin(a)*cos(a) with induced drag
    cl^2/(pi*e*AR); past the stall angle the lift decays linearly to a
    residual at 90 deg while drag rises toward the flat-plate value. cl is
    odd in alpha, cd even; both are continuous over the full circle.
    """
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    a = math.remainder(alpha, math.tau)
    sign = 1.0 if a >= 0 else -1.0
    s = abs(a)

    cd0 = spec.zero_lift_drag_coeff
    stall = spec.stall_angle
    induced = math.pi * OSWALD_EFFICIENCY * spec.aspect_ratio
    cl_stall = 2.0 * math.pi * math.sin(stall) * math.cos(stall)
    cd_stall = cd0 + cl_stall * cl_stall / induced

    if s <= stall:
        cl = 2.0 * math.pi * math.sin(s) * math.cos(s)
        cd = cd0 + cl * cl / induced
    elif s <= math.pi / 2:
        t = (s - stall) / (math.pi / 2 - stall)
        cl = cl_stall * (1.0 - (1.0 - spec.post_stall_residual) * t)
        cd = cd_stall + (spec.flat_plate_drag - cd_stall) * t
    else:
        # Beyond 90 deg (flow approaching from behind the chord line): taper
        # both coefficients back so extreme transients stay bounded.
        t = (s - math.pi / 2) / (math.pi / 2)
        cl = spec.post_stall_residual * cl_stall * (1.0 - t)
        cd = spec.flat_plate_drag + (cd0 - spec.flat_plate_drag) * t
    return sign * cl, cd


def inflow_angle(heave_rate: float, surge_speed: float) -> float:
    """Instantaneous inflow angle phi seen by the foil frame."""
    if heave_rate == 0.0 and surge_speed == 0.0:
        return 0.0
    return math.atan2(-heave_rate, surge_speed)


def hydrodynamic_pitch_moment(
    pitch: float,
    heave_rate: float,
    surge_speed: float,
    spec: FoilSpec,
    water_density: float = WATER_DENSITY,
    moment_arm: float | None = None,
) -> float:
    """Pitching moment driving the foil toward the inflow angle.

    Lift acting ahead of the pivot weathervanes the foil: positive when the
    inflow sits above the chord (alpha > 0), zero once aligned.
    """
    v2 = heave_rate * heave_rate + surge_speed * surge_speed
    if v2 == 0.0:
        return 0.0
    if moment_arm is None:
        moment_arm = DEFAULT_MOMENT_ARM_FRAC * spec.chord
    phi = inflow_angle(heave_rate, surge_speed)
    cl, _ = lift_drag_coefficients(phi - pitch, spec)
    q = 0.5 * water_density * v2
    return q * spec.planform_area * moment_arm * cl


def passive_pitch_step(
    state: PitchState,
    heave_rate: float,
    surge_speed: float,
    spring: SpringSpec,
    spec: FoilSpec,
    dt: float,
    *,
    inertia: float = DEFAULT_PITCH_INERTIA,
    upper_stop: float = UPPER_STOP,
    lower_stop: float = LOWER_STOP,
    water_density: float = WATER_DENSITY,
) -> PitchState:
    """Advance the sprung pitch dynamics by dt and clamp at the hard stops.

    Integrates I*qdd = M_hydro - k*(q - neutral) - c*qd with semi-implicit
    Euler. The stiffness grows with dynamic pressure, so the step is split
    into internal substeps sized from the current natural frequency; the
    external dt grid stays fixed and deterministic. at_stop reports the most
    recent hard-stop contact within this step (clamping zeroes the rate
    component directed into the stop), FREE if no stop was touched.
    """
    if not 0.0 < dt <= 0.05:
        raise ValueError("dt must lie in (0, 0.05] s")

    k = spring.torsional_stiffness
    c = spring.damping
    v2 = heave_rate * heave_rate + surge_speed * surge_speed
    q = 0.5 * water_density * v2
    arm = DEFAULT_MOMENT_ARM_FRAC * spec.chord
    # Local linearized stiffness bound: thin-foil slope 2*pi on the hydro side.
    k_bound = k + q * spec.planform_area * arm * 2.0 * math.pi
    omega = math.sqrt(k_bound / inertia)
    n_sub = max(1, min(512, math.ceil(dt * omega / 0.5)))
    h = dt / n_sub

    angle = state.angle
    rate = state.angular_rate
    contact = StopContact.FREE
    for _ in range(n_sub):
        m_hydro = hydrodynamic_pitch_moment(
            angle, heave_rate, surge_speed, spec, water_density, arm
        )
        torque = m_hydro - k * (angle - spring.neutral_angle) - c * rate
        rate += h * torque / inertia
        angle += h * rate
        if angle >= upper_stop:
            angle = upper_stop
            if rate > 0.0:
                rate = 0.0
            contact = StopContact.UPPER_STOP
        elif angle <= lower_stop:
            angle = lower_stop
            if rate < 0.0:
                rate = 0.0
            contact = StopContact.LOWER_STOP
    return PitchState(angle=angle, angular_rate=rate, at_stop=contact)


def foil_thrust(
    pitch: float,
    heave_rate: float,
    surge_speed: float,
    spec: FoilSpec,
    water_density: float = WATER_DENSITY,
) -> float:
    """Surge-direction force of one foil, N (positive forward).

    Lift and drag at the effective incidence alpha = phi - pitch are resolved
    through the inflow angle phi; with no flow there is no force.
    """
    if water_density <= 0:
        raise ValueError("water_density must be positive")
    v2 = heave_rate * heave_rate + surge_speed * surge_speed
    if v2 == 0.0:
        return 0.0
    phi = inflow_angle(heave_rate, surge_speed)
    cl, cd = lift_drag_coefficients(phi - pitch, spec)
    q = 0.5 * water_density * v2
    lift = q * spec.planform_area * cl
    drag = q * spec.planform_area * cd
    return lift * math.sin(phi) - drag * math.cos(phi)


def interference_gain(count: int, a: float) -> float:
    """Vortex-interference gain g(n) = 1 + a*(1 - 1/n); g(1) = 1, concave."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return 1.0 + a * (1.0 - 1.0 / count)


def spacing_factor(spacing: float, array: FoilArraySpec) -> float:
    """Spacing penalty h(s) = (s_ref/s)^beta, clipped to [0.5, 1.5]."""
    raw = (array.reference_spacing / spacing) ** array.spacing_exponent_beta
    return min(1.5, max(0.5, raw))


def array_thrust(per_foil_mean_thrust: float, array: FoilArraySpec) -> float:
    """Total array thrust from the per-foil cycle mean.

    total = per_foil * n * g(n) * h(s): strictly increasing in count with
    non-increasing increments, non-increasing in spacing.
    """
    if not math.isfinite(per_foil_mean_thrust):
        raise ValueError("per_foil_mean_thrust must be finite")
    if array.count == 0:
        return 0.0
    g = interference_gain(array.count, array.interference_gain_a)
    h = spacing_factor(array.spacing, array)
    return per_foil_mean_thrust * array.count * g * h


def scale_spring_rate(reference_rate: float, reference_area: float, target_area: float) -> float:
    """Scale a published spring rate by the ratio of wing surface areas."""
    if reference_rate <= 0 or reference_area <= 0 or target_area <= 0:
        raise ValueError("all inputs must be positive")
    return reference_rate * (target_area / reference_area)
