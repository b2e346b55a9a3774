"""Autopilot decision tests: bearings, PD clamp, arbitration, capsize,
sea-state estimation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usvsim.guidance import (
    MissionTracker,
    Waypoint,
    desired_heading,
    detect_capsize,
    estimate_sea_state,
    heading_controller,
    waypoint_arbiter,
)

RUDDER = math.radians(35.0)


def test_bearing_axis_aligned():
    assert desired_heading((0, 0), Waypoint(0, 100, 0)) == pytest.approx(0.0)
    assert desired_heading((0, 0), Waypoint(0, 0, 100)) == pytest.approx(math.pi / 2)


def test_bearing_arctangent():
    assert desired_heading((3, 4), Waypoint(0, 0, 0)) == pytest.approx(
        math.atan2(-4, -3)
    )
    assert desired_heading((3, 4), Waypoint(0, 0, 0)) == pytest.approx(-2.214, abs=1e-3)


def test_pd_zero_at_zero():
    assert heading_controller(0.0, 0.0) == 0.0


def test_pd_saturates_at_worst_case_error():
    assert heading_controller(math.pi, 0.0) == pytest.approx(RUDDER)


def test_pd_odd_symmetry():
    for err, rate in ((0.3, -0.05), (1.0, 0.2), (0.01, 0.0)):
        assert heading_controller(-err, -rate) == pytest.approx(
            -heading_controller(err, rate)
        )


@given(
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-5.0, max_value=5.0),
)
@settings(max_examples=200, deadline=None)
def test_pd_never_exceeds_rudder_travel(err, rate):
    assert abs(heading_controller(err, rate)) <= RUDDER


def test_arbiter_advances_on_arrival():
    tracker = MissionTracker([Waypoint(0, 100, 0), Waypoint(1, 200, 0)])
    assert tracker.active((0, 0), 0) == Waypoint(0, 100, 0)
    # Within the 25 m default radius of the first: it retires, next is active.
    assert tracker.active((80, 0), 0) == Waypoint(1, 200, 0)
    assert tracker.active((80, 0), 0) == Waypoint(1, 200, 0)


def test_arbiter_empty_mission_station_keeps():
    tracker = MissionTracker([])
    assert tracker.active((0, 0), 0) is None
    assert waypoint_arbiter((0, 0), tracker, 0) is None


def test_arbiter_mission_replacement_idempotent():
    wps = [Waypoint(0, 100, 0), Waypoint(1, 200, 0)]
    tracker = MissionTracker(list(wps))
    tracker.active((80, 0), 0)  # retire the first
    before = tracker.active((80, 0), 0)
    tracker.replace(list(wps))
    assert tracker.active((80, 0), 0) == before


def test_arbiter_never_revisits_arrived():
    tracker = MissionTracker([Waypoint(0, 10, 0), Waypoint(1, 400, 0)])
    tracker.active((10, 0), 0)
    # Going back near the first waypoint must not resurrect it.
    assert tracker.active((10, 0), 1) == Waypoint(1, 400, 0)


def test_arbiter_respects_future_hours_in_order():
    tracker = MissionTracker([Waypoint(2, 100, 0), Waypoint(3, 200, 0)])
    # Hour 0: first waypoint (hour 2 >= 0) is the target; order is kept.
    assert tracker.active((0, 0), 0) == Waypoint(2, 100, 0)


def test_arbiter_skips_overdue_waypoints():
    tracker = MissionTracker([Waypoint(0, 100, 0), Waypoint(2, 200, 0)])
    assert tracker.active((0, 0), 1) == Waypoint(2, 200, 0)


def test_arbiter_unsorted_mission_rejected():
    with pytest.raises(ValueError):
        MissionTracker([Waypoint(3, 0, 0), Waypoint(1, 1, 1)])


def test_mission_complete():
    tracker = MissionTracker([Waypoint(0, 5, 0)])
    assert not tracker.complete()
    tracker.active((5, 0), 0)
    assert tracker.complete()


def test_capsize_thresholds():
    assert not detect_capsize(0.0, 0.0)
    assert detect_capsize(math.pi, 0.0)
    assert not detect_capsize(math.radians(89.0), 0.0)
    assert detect_capsize(0.0, math.radians(91.0))


def test_sea_state_zero_window():
    assert estimate_sea_state([0.0] * 128, 0.05) == 0.0


def test_sea_state_short_window_rejected():
    with pytest.raises(ValueError):
        estimate_sea_state([0.0] * 63, 0.05)


def test_sea_state_sinusoid_closed_form():
    # Heave x = A sin(wt): the 4*sigma estimate converges to 4A/sqrt(2).
    amp, period, dt = 0.25, 4.0, 0.05
    omega = math.tau / period
    n = 1024
    accel = [-amp * omega**2 * math.sin(omega * i * dt) for i in range(n)]
    estimate = estimate_sea_state(accel, dt)
    assert estimate == pytest.approx(4 * amp / math.sqrt(2), rel=0.10)
    assert estimate == pytest.approx(0.707, rel=0.10)


def test_sea_state_white_noise_deterministic():
    rng = np.random.default_rng(5)
    accel = rng.normal(0.0, 0.5, size=256)
    a = estimate_sea_state(accel, 0.05)
    b = estimate_sea_state(accel.copy(), 0.05)
    assert math.isfinite(a) and a == b
