"""Synthetic environmental truth fields and the four water-quality sensors.

Each sensor applies its datasheet range clamp, accuracy-bounded seeded noise
and response dynamics: conductivity, temperature and pH are single-pole lags
(tau derived from the "90% in X s" / "95% in 1 s" figures), dissolved oxygen
is slew-limited at 0.5 mg/L per second.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

DAY_SECONDS = 86400.0


class SensorKind(Enum):
    CONDUCTIVITY = "conductivity"
    TEMPERATURE = "temperature"
    DISSOLVED_OXYGEN = "dissolved_oxygen"
    PH = "ph"


@dataclass(frozen=True)
class SensorSpec:
    """Range, accuracy and response model of one probe.

    The noise bound is accuracy_base + accuracy_per_unit*|truth| +
    accuracy_relative*|truth|, which covers the absolute, temperature-style
    and percentage-style datasheet accuracy formats with one shape.
    """

    kind: SensorKind
    range_min: float
    range_max: float
    accuracy_base: float = 0.0
    accuracy_per_unit: float = 0.0
    accuracy_relative: float = 0.0
    tau: float | None = None         # s, first-order response
    slew_rate: float | None = None   # units/s, slew-limited response
    max_depth: float = 60.0

    def noise_bound(self, truth: float) -> float:
        return (
            self.accuracy_base
            + self.accuracy_per_unit * abs(truth)
            + self.accuracy_relative * abs(truth)
        )


def _tau_from_pct(settle_s: float, pct: float) -> float:
    """Single-pole time constant from 'reaches pct of a step in settle_s'."""
    return settle_s / math.log(1.0 / (1.0 - pct))


SENSOR_CATALOG = {
    SensorKind.CONDUCTIVITY: SensorSpec(
        kind=SensorKind.CONDUCTIVITY,
        range_min=10.0,           # uS/cm
        range_max=1_000_000.0,    # 1 S/cm
        accuracy_relative=0.02,
        tau=_tau_from_pct(1.0, 0.90),
    ),
    SensorKind.TEMPERATURE: SensorSpec(
        kind=SensorKind.TEMPERATURE,
        range_min=-200.0,
        range_max=850.0,
        accuracy_base=0.15,
        accuracy_per_unit=0.002,
        tau=_tau_from_pct(13.0, 0.90),
    ),
    SensorKind.DISSOLVED_OXYGEN: SensorSpec(
        kind=SensorKind.DISSOLVED_OXYGEN,
        range_min=1.0,
        range_max=50.0,
        accuracy_base=0.2,
        slew_rate=0.5,
    ),
    SensorKind.PH: SensorSpec(
        kind=SensorKind.PH,
        range_min=0.0,
        range_max=14.0,
        accuracy_base=0.002,
        tau=_tau_from_pct(1.0, 0.95),
    ),
}


@dataclass(frozen=True)
class SensorState:
    internal_value: float
    last_t: float = 0.0


@dataclass(frozen=True)
class EnvFieldSpec:
    """Deterministic spatial truth for one quantity."""

    base: float
    gradient_x: float = 0.0      # units per m
    gradient_y: float = 0.0
    diurnal_amplitude: float = 0.0
    noise_amplitude: float = 0.0
    seed: int = 0


def truth(field: EnvFieldSpec, x: float, y: float, t: float) -> float:
    """Truth value at (x, y, t): base + gradient + diurnal + smooth seeded noise."""
    value = (
        field.base
        + field.gradient_x * x
        + field.gradient_y * y
        + field.diurnal_amplitude * math.sin(math.tau * t / DAY_SECONDS)
    )
    if field.noise_amplitude != 0.0:
        rng = np.random.default_rng(field.seed)
        # Three fixed plane waves drawn once from the seed keep the noise
        # smooth and reproducible for any (x, y, t).
        for _ in range(3):
            kx, ky = rng.uniform(-0.01, 0.01, size=2)
            omega = rng.uniform(math.tau / 7200.0, math.tau / 600.0)
            phase = rng.uniform(0.0, math.tau)
            value += (field.noise_amplitude / 3.0) * math.sin(
                kx * x + ky * y + omega * t + phase
            )
    return value


def sample(
    spec: SensorSpec,
    state: SensorState,
    truth_value: float,
    t: float,
    rng: np.random.Generator | None = None,
) -> tuple[SensorState, float]:
    """Advance the sensor to time t against the given truth and read it.

    Returns the new state and a reading: the response-limited internal value
    plus accuracy-bounded uniform noise, clamped to the sensor range. Pass
    rng=None to sample without noise.
    """
    dt = t - state.last_t
    if dt < 0:
        raise ValueError("sample times must be non-decreasing")

    internal = state.internal_value
    if spec.tau is not None:
        internal = truth_value + (internal - truth_value) * math.exp(-dt / spec.tau)
    elif spec.slew_rate is not None:
        max_move = spec.slew_rate * dt
        delta = truth_value - internal
        internal += math.copysign(min(abs(delta), max_move), delta)
    else:
        internal = truth_value

    internal = min(spec.range_max, max(spec.range_min, internal))
    noise = 0.0
    if rng is not None:
        bound = spec.noise_bound(truth_value)
        if bound > 0.0:
            noise = rng.uniform(-bound, bound)
    reading = min(spec.range_max, max(spec.range_min, internal + noise))
    return SensorState(internal_value=internal, last_t=t), reading


def initial_state(spec: SensorSpec, truth_value: float, t: float = 0.0) -> SensorState:
    """Sensor state pre-settled on the local truth (clamped into range)."""
    v = min(spec.range_max, max(spec.range_min, truth_value))
    return SensorState(internal_value=v, last_t=t)
