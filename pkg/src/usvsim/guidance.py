"""Waypoint autopilot: bearing, PD heading control, hourly waypoint
arbitration, capsize detection and sea-state estimation from heave motion."""

import math
from dataclasses import dataclass

import numpy as np

from .geo import wrap_angle

RUDDER_LIMIT = math.radians(35.0)
DEFAULT_KP = 0.6
DEFAULT_KD = 1.2
DEFAULT_ARRIVAL_RADIUS = 25.0
CAPSIZE_THRESHOLD = math.radians(90.0)
MIN_SEA_STATE_WINDOW = 64


@dataclass(frozen=True)
class Waypoint:
    hour_index: int
    x: float
    y: float

    def __post_init__(self):
        if self.hour_index < 0:
            raise ValueError("hour_index must be non-negative")


def desired_heading(fix: tuple[float, float], active: Waypoint) -> float:
    """Planar bearing from the current fix to the active waypoint."""
    return wrap_angle(math.atan2(active.y - fix[1], active.x - fix[0]))


def heading_controller(
    err: float,
    err_rate: float,
    kp: float = DEFAULT_KP,
    kd: float = DEFAULT_KD,
    limit: float = RUDDER_LIMIT,
) -> float:
    """PD rudder command, clamped to the rudder travel; odd in (err, rate)."""
    cmd = kp * err + kd * err_rate
    return min(limit, max(-limit, cmd))


class MissionTracker:
    """Arbitrates the active waypoint over an hourly mission schedule.

    A waypoint becomes eligible at its hour index and is retired on arrival
    within the acceptance radius; arrived waypoints are never revisited, and
    replacing the mission with an equal list leaves the arbitration state
    unchanged.
    """

    def __init__(self, mission: list[Waypoint] | None = None,
                 arrival_radius: float = DEFAULT_ARRIVAL_RADIUS):
        self.arrival_radius = arrival_radius
        self._mission: list[Waypoint] = []
        self._arrived: set[tuple[int, float, float]] = set()
        if mission:
            self.replace(mission)

    @staticmethod
    def _key(wp: Waypoint) -> tuple[int, float, float]:
        return (wp.hour_index, wp.x, wp.y)

    def replace(self, mission: list[Waypoint]) -> None:
        hours = [wp.hour_index for wp in mission]
        if hours != sorted(hours):
            raise ValueError("mission must be hour-sorted")
        self._mission = list(mission)
        keys = {self._key(wp) for wp in mission}
        self._arrived &= keys

    @property
    def mission(self) -> list[Waypoint]:
        return list(self._mission)

    @property
    def arrived_count(self) -> int:
        return len(self._arrived)

    def active(self, fix: tuple[float, float], sim_hour: int) -> Waypoint | None:
        """Current target, retiring any waypoint already inside the radius.

        The active waypoint is the first unarrived one whose hour index has
        not already passed; waypoints overtaken by the schedule are skipped.
        Returns None when the mission is empty or exhausted (station-keep).
        """
        while True:
            candidate = None
            for wp in self._mission:
                if self._key(wp) in self._arrived:
                    continue
                if wp.hour_index >= sim_hour:
                    candidate = wp
                    break
            if candidate is None:
                return None
            dx = candidate.x - fix[0]
            dy = candidate.y - fix[1]
            if math.hypot(dx, dy) <= self.arrival_radius:
                self._arrived.add(self._key(candidate))
                continue
            return candidate

    def complete(self) -> bool:
        return all(self._key(wp) in self._arrived for wp in self._mission)


def waypoint_arbiter(
    fix: tuple[float, float],
    tracker: MissionTracker,
    sim_hour: int,
) -> Waypoint | None:
    """Functional facade over MissionTracker.active for one arbitration."""
    return tracker.active(fix, sim_hour)


def detect_capsize(roll: float, pitch: float,
                   threshold: float = CAPSIZE_THRESHOLD) -> bool:
    """True once roll or pitch passes the inversion threshold."""
    return abs(roll) > threshold or abs(pitch) > threshold


def _detrend(y: "np.ndarray") -> "np.ndarray":
    """Remove the least-squares line (high-pass against integration drift)."""
    n = y.size
    t = np.arange(n, dtype=float)
    t -= t.mean()
    denom = float(t @ t)
    slope = float(t @ (y - y.mean())) / denom if denom else 0.0
    return y - y.mean() - slope * t


def estimate_sea_state(heave_accels: "np.ndarray | list[float]", dt: float) -> float:
    """Significant wave height estimate from a vertical-acceleration window.

    Double integration with a linear de-trend after each stage (the high-pass
    that keeps integration drift out of fractional-period windows), then the
    standard 4*sigma of the reconstructed heave displacement. For sinusoidal
    heave of amplitude A this converges to 4*A/sqrt(2).
    """
    a = np.asarray(heave_accels, dtype=float)
    if a.size < MIN_SEA_STATE_WINDOW:
        raise ValueError(
            f"need at least {MIN_SEA_STATE_WINDOW} samples, got {a.size}"
        )
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = _detrend(np.cumsum(a - a.mean()) * dt)
    x = _detrend(np.cumsum(v) * dt)
    return 4.0 * float(x.std())
