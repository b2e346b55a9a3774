"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to stream them). Tolerances are pinned here.
"""

import base64
import json
import math
import random
from contextlib import contextmanager

import numpy as np
import pytest

from usvsim import sensors, wire
from usvsim.foils import scale_spring_rate
from usvsim.geo import LocalFrame, wrap_angle
from usvsim.guidance import desired_heading, Waypoint
from usvsim.harness import run, sweep
from usvsim.links import DOWNLINK, UPLINK, SatChannel, SatLinkSpec, WindowSchedule
from usvsim.power import BatteryBank, MpptSpec, mppt_step
from usvsim.scenario import default_config
from usvsim.station import StationStore

FRAME = LocalFrame(59.91, 10.75)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def quiet_cfg(**over):
    base = {"sensors.noise": False}
    base.update(over)
    return default_config(base)


def test_spring_rate_scaling():
    with criterion("spring-scaling 2.9 N/mm x 0.406 -> 1.178 N/mm"):
        assert scale_spring_rate(2.9, 0.096, 0.039) == pytest.approx(1.178, abs=1e-3)


def test_limit_angle_sweep_argmax_at_20_deg():
    with criterion("limit-angle sweep argmax at 20 deg, stall beyond 25"):
        cfg = quiet_cfg(duration=240.0)
        rows = sweep("limit_angle", [10, 15, 20, 25, 30], cfg)
        thrust = {r["value"]: r["mean_thrust_n"] for r in rows}
        assert max(thrust, key=thrust.get) == 20
        assert thrust[30] < thrust[25]


def test_foil_count_sweep_concave_increasing():
    with criterion("foil-count sweep 1..8 increasing, concave increments"):
        # A steady thruster assist holds every count near comparable inflow,
        # mirroring the constant-conditions wing-count experiments.
        cfg = quiet_cfg(**{
            "duration": 240.0,
            "thruster.max_force": 40.0,
            "thruster.level": 1.0,
        })
        rows = sweep("foil_count", [1, 2, 3, 4, 5, 6, 7, 8], cfg)
        thrust = [r["mean_thrust_n"] for r in rows]
        assert all(b > a for a, b in zip(thrust, thrust[1:]))
        increments = [b - a for a, b in zip(thrust, thrust[1:])]
        assert all(i2 <= i1 + 1e-9 for i1, i2 in zip(increments, increments[1:]))


def test_spacing_sweep_non_increasing():
    with criterion("spacing sweep 6/12/24/48 mm non-increasing thrust"):
        cfg = quiet_cfg(duration=240.0)
        rows = sweep("spacing", [0.006, 0.012, 0.024, 0.048], cfg)
        thrust = [r["mean_thrust_n"] for r in rows]
        assert all(b <= a + 1e-9 for a, b in zip(thrust, thrust[1:]))


def test_tether_tension_never_negative_across_scenarios():
    with criterion("tether tension >= 0 every step, wave height 0..2 m"):
        scenarios = [
            {"wave.amplitude": 0.0},
            {},  # default H = 0.5 m
            {"wave.amplitude": 1.0},  # H = 2 m: slack episodes expected
            {"wave.spectrum": [(0.3, 3.0, 0.0), (0.2, 5.5, 1.0), (0.1, 8.0, 2.0)]},
            {"events.capsize_at": "30", "wave.amplitude": 0.6},
        ]
        for over in scenarios:
            cfg = quiet_cfg(**{"duration": 120.0, "output.cadence": 0.02, **over})
            art = run(cfg)
            tensions = [float(r.split(",")[12]) for r in art.state_rows]
            assert len(tensions) == cfg.steps
            assert all(t >= 0.0 for t in tensions)


def test_battery_depletion_and_load_cap():
    with criterion("333 W cap load depletes 32.4 Ah active bank in 1.08 h +-1%"):
        bank = BatteryBank(soc=1.0)
        mppt = MpptSpec()
        dt, t = 1.0, 0.0
        while bank.soc > 0.0 and t < 2 * 3600:
            bank, _ = mppt_step(0.0, {"electronics": 333.0}, bank, mppt, dt, t)
            t += dt
        assert t / 3600.0 == pytest.approx(1.08, rel=0.01)

        bank, tick = mppt_step(0.0, {"thruster": 400.0}, BatteryBank(soc=0.9),
                               mppt, 1.0)
        assert tick.load_shed
        assert tick.delivered_w == pytest.approx(30.0 * 11.1)


def test_energy_ledger_closure_over_1e6_steps():
    with criterion("ledger closure < 1e-6 Wh over 1e6 steps"):
        bank = BatteryBank(soc=0.6)
        mppt = MpptSpec()
        dt = 0.5
        solar_terms = []
        load_terms = []
        delta_terms = []
        for k in range(1_000_000):
            solar = 60.0 * (1.0 + math.sin(k * 1e-4))
            load = {"electronics": 6.0 + 4.0 * math.sin(k * 3e-4 + 1.0)}
            bank, tick = mppt_step(solar, load, bank, mppt, dt, k * dt)
            solar_terms.append(tick.solar_in_w * mppt.conversion_efficiency * dt / 3600.0)
            load_terms.append(tick.delivered_w * dt / 3600.0)
            delta_terms.append(tick.battery_delta_wh)
        residual = math.fsum(solar_terms) - math.fsum(load_terms) - math.fsum(delta_terms)
        assert abs(residual) < 1e-6


def test_sensor_dynamics_and_noise_bounds():
    with criterion("sensor response times within 2% / DO slew 1%; noise bounded"):
        temp = sensors.SENSOR_CATALOG[sensors.SensorKind.TEMPERATURE]
        state = sensors.SensorState(internal_value=0.0)
        _, reading = sensors.sample(temp, state, 10.0, t=13.0, rng=None)
        assert reading == pytest.approx(9.0, rel=0.02)

        ph = sensors.SENSOR_CATALOG[sensors.SensorKind.PH]
        state = sensors.SensorState(internal_value=0.0)
        _, reading = sensors.sample(ph, state, 1.0, t=1.0, rng=None)
        assert reading == pytest.approx(0.95, rel=0.02)

        do = sensors.SENSOR_CATALOG[sensors.SensorKind.DISSOLVED_OXYGEN]
        state = sensors.SensorState(internal_value=5.0)
        t = 0.0
        while state.internal_value < 15.0 - 1e-9:
            t += 0.1
            state, _ = sensors.sample(do, state, 15.0, t, rng=None)
        assert t == pytest.approx(20.0, rel=0.01)

        rng = np.random.default_rng(11)
        checks = {
            sensors.SensorKind.TEMPERATURE: 12.0,
            sensors.SensorKind.CONDUCTIVITY: 50000.0,
            sensors.SensorKind.DISSOLVED_OXYGEN: 8.0,
            sensors.SensorKind.PH: 8.1,
        }
        for kind, truth_v in checks.items():
            spec = sensors.SENSOR_CATALOG[kind]
            state = sensors.initial_state(spec, truth_v)
            bound = spec.noise_bound(truth_v)
            t = 0.0
            for _ in range(25_000):
                t += 1.0
                state, reading = sensors.sample(spec, state, truth_v, t, rng)
                assert abs(reading - truth_v) <= bound + 1e-12


def test_codec_criteria():
    with criterion("codec: 1e4 round-trips, corruption detection, exact sizes"):
        rng = random.Random(2024)
        for _ in range(10_000):
            frame = wire.TelemetryFrame.from_values(
                seq=rng.randrange(0x10000),
                timestamp=rng.randrange(2**32),
                lat_deg=rng.uniform(-90, 90),
                lon_deg=rng.uniform(-180, 180),
                heading_deg=rng.uniform(-180, 180),
                speed_m_s=rng.uniform(0, 3),
                soc_frac=rng.random(),
                temperature_c=rng.uniform(-5, 35),
                conductivity_us=rng.uniform(10, 1e6),
                dissolved_oxygen_mg_l=rng.uniform(1, 50),
                ph=rng.uniform(0, 14),
                capsized=rng.random() < 0.5,
                thruster_on=rng.random() < 0.5,
                on_backup=rng.random() < 0.5,
                load_shed=rng.random() < 0.5,
            )
            encoded = wire.encode(frame)
            assert len(encoded) == 39
            assert wire.decode(encoded) == frame

        encoded = wire.encode(wire.TelemetryFrame.from_values(
            7, 1000.0, 59.91, 10.75, 45.0, 0.5, 0.9, 12.0, 5e4, 8.0, 8.1))
        for i in range(len(encoded)):
            for flip in range(1, 256):
                corrupted = bytearray(encoded)
                corrupted[i] ^= flip
                with pytest.raises(wire.FrameError):
                    wire.decode(bytes(corrupted))

        assert wire.ACK_FRAME_SIZE == 15
        assert len(wire.encode(wire.AckFrame(seq=1, timestamp=0,
                                             mission_version=1))) == 15
        oversize = [(h, 59.0, 10.0) for h in range(26)]
        with pytest.raises(wire.FrameError):
            wire.CommandFrame.from_waypoints(1, 0.0, oversize)
        assert 11 + 10 * 26 + 4 == 275 > 270  # the MTU arithmetic the cap encodes


def test_store_and_forward_outage_and_replay():
    with criterion("store-and-forward: 1 h outage, no loss, FIFO, idempotent replay"):
        outage = (600.0, 4200.0)
        spec = SatLinkSpec(latency=60.0, windows=WindowSchedule(outages=(outage,)))
        channel = SatChannel(spec)
        store = StationStore()

        sent_up = []
        for i in range(1, 9):
            t = 500.0 + i * 300.0  # frames 1..8, most land inside the outage
            frame = wire.TelemetryFrame.from_values(
                i, t, 59.91, 10.75, 0.0, 0.3, 0.8, 12.0, 5e4, 8.0, 8.1)
            channel.send(wire.encode(frame), t, UPLINK)
            sent_up.append(frame.seq)
        store.post_mission("usv-1", [(0, 59.92, 10.76)], t=700.0)
        store.post_mission("usv-1", [(0, 59.93, 10.77)], t=800.0)
        store.relay_step(900.0, channel)

        delivered_up, delivered_down = [], []
        t = 0.0
        while t < 6000.0:
            t += 30.0
            for d in channel.due(t):
                if d.direction == UPLINK:
                    delivered_up.append(wire.decode(d.data).seq)
                else:
                    delivered_down.append(wire.decode(d.data).seq)
        assert delivered_up == sent_up          # no loss, FIFO preserved
        assert delivered_down == [1, 2]         # mission versions in post order
        assert channel.pending_count == 0

        # Idempotent ingestion: replaying the full delivery log twice gives a
        # byte-identical store export.
        frames = [
            wire.TelemetryFrame.from_values(
                i, i * 10.0, 59.91, 10.75, 0.0, 0.3, 0.8, 12.0, 5e4, 8.0, 8.1)
            for i in range(1, 20)
        ]
        s1, s2 = StationStore(), StationStore()
        for f in frames:
            s1.ingest(f, "usv-1")
        for f in frames + frames:
            s2.ingest(f, "usv-1")
        assert s1.export_snapshot() == s2.export_snapshot()


def test_closed_loop_mission():
    with criterion("closed-loop: 3 waypoints @200 m reached, 90 deg turn settles <5 deg"):
        wps = [(0, *FRAME.to_latlon(200.0, 0.0)),
               (1, *FRAME.to_latlon(200.0, 200.0)),
               (2, *FRAME.to_latlon(200.0, 400.0))]
        cfg = quiet_cfg(**{
            "duration": 3600.0,
            "mission.waypoints": [(h, lat, lon) for h, (lat, lon) in
                                  ((w[0], (w[1], w[2])) for w in wps)],
        })
        art = run(cfg)
        assert art.summary["waypoints_arrived"] == 3
        assert art.summary["max_abs_rudder_deg"] <= 35.0 + 1e-6

        # Heading error against the second waypoint after the 90 deg turn.
        rows = [r.split(",") for r in art.state_rows]
        arrived = [int(r[17]) for r in rows]
        turn_idx = arrived.index(1)
        wp1 = Waypoint(1, 200.0, 200.0)
        errors = []
        for r in rows[turn_idx:]:
            if int(r[17]) != 1:
                break
            fix = (float(r[1]), float(r[2]))
            err = wrap_angle(desired_heading(fix, wp1) - math.radians(float(r[5])))
            errors.append(abs(math.degrees(err)))
        settled = next((i for i, e in enumerate(errors) if e < 5.0), None)
        assert settled is not None and settled < 300
        assert all(e < 20.0 for e in errors[settled:])


def test_determinism_and_dt_convergence(tmp_path):
    with criterion("byte-identical artifacts; dt halving changes mean surge < 2%"):
        cfg = quiet_cfg(duration=300.0)
        run(cfg, tmp_path / "r1")
        run(cfg, tmp_path / "r2")
        for name in ("state.csv", "energy.csv", "link.csv",
                     "summary.json", "logbook.jsonl"):
            assert (tmp_path / "r1" / name).read_bytes() == \
                (tmp_path / "r2" / name).read_bytes()

        m_coarse = run(quiet_cfg(duration=3600.0, dt=0.02)).summary["mean_surge_speed"]
        m_fine = run(quiet_cfg(duration=3600.0, dt=0.01)).summary["mean_surge_speed"]
        assert abs(m_coarse - m_fine) / m_fine < 0.02
