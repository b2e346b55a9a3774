"""Power plant tests: solar transfer, MPPT cap/shed, coulomb ledger."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usvsim.power import (
    BatteryBank,
    MpptSpec,
    PowerTick,
    SolarArraySpec,
    energy_report,
    mppt_step,
    solar_power,
)

SOLAR = SolarArraySpec()
MPPT = MpptSpec()


def test_solar_night_is_zero():
    assert solar_power(0.0, SOLAR) == 0.0


def test_solar_full_sun_closed_form():
    # 3 panels x 30 W x (1 - 0.4/18) = 88.0 W
    assert solar_power(1.0, SOLAR) == pytest.approx(88.0)


def test_solar_scales_proportionally():
    full = solar_power(1.0, SOLAR)
    for frac in (0.1, 0.25, 0.5, 2 / 3):
        assert solar_power(frac, SOLAR) == pytest.approx(frac * full)
        assert solar_power(frac, SOLAR) >= 0.0


def test_solar_rejects_out_of_range():
    with pytest.raises(ValueError):
        solar_power(-0.1, SOLAR)
    with pytest.raises(ValueError):
        solar_power(1.1, SOLAR)


def test_balanced_bus_leaves_soc_unchanged():
    bank = BatteryBank(soc=0.5)
    load = 100.0
    solar = load / MPPT.conversion_efficiency
    bank2, tick = mppt_step(solar, {"electronics": load}, bank, MPPT, dt=1.0)
    assert bank2.soc == pytest.approx(0.5, abs=1e-12)
    assert tick.battery_delta_wh == pytest.approx(0.0, abs=1e-12)
    assert not tick.load_shed


def test_full_load_depletes_active_packs_in_108_minutes():
    # 32.4 Ah of active capacity at the 30 A cap: empty after 1.08 h.
    bank = BatteryBank(soc=1.0)
    dt = 1.0
    t = 0.0
    load = {"electronics": 333.0}
    while bank.soc > 0.0:
        bank, tick = mppt_step(0.0, load, bank, MPPT, dt, t)
        t += dt
        assert not tick.on_backup or bank.soc == 0.0
        if t > 2 * 3600:
            pytest.fail("active packs never depleted")
    assert t / 3600.0 == pytest.approx(1.08, rel=0.01)


def test_load_above_cap_is_shed():
    bank = BatteryBank(soc=0.8)
    bank2, tick = mppt_step(0.0, {"thruster": 400.0}, bank, MPPT, dt=1.0)
    cap = MPPT.load_current_limit * bank.nominal_voltage
    assert tick.load_shed
    assert tick.delivered_w == pytest.approx(cap)
    assert tick.shed_w == pytest.approx(400.0 - cap)


def test_backup_supplies_load_when_active_empty():
    bank = BatteryBank(soc=0.0, backup_soc=1.0)
    bank2, tick = mppt_step(0.0, {"electronics": 111.0}, bank, MPPT, dt=60.0)
    assert tick.on_backup
    assert bank2.backup_soc < 1.0
    assert bank2.soc == 0.0
    # 111 W for 60 s = 1.85 Wh drawn from the 119.88 Wh backup pack.
    expected = 1.0 - (111.0 * 60 / 3600.0) / bank.backup_capacity_wh
    assert bank2.backup_soc == pytest.approx(expected)


def test_backup_never_recharges_and_only_drains_on_backup():
    bank = BatteryBank(soc=0.2, backup_soc=0.7)
    prev_backup = bank.backup_soc
    for solar, load in ((500.0, 10.0), (0.0, 50.0), (200.0, 100.0)):
        bank, tick = mppt_step(solar, {"electronics": load}, bank, MPPT, dt=30.0)
        if not tick.on_backup:
            assert bank.backup_soc == prev_backup
        assert bank.backup_soc <= prev_backup
        prev_backup = bank.backup_soc


def test_both_banks_empty_browns_out():
    bank = BatteryBank(soc=0.0, backup_soc=0.0)
    bank2, tick = mppt_step(0.0, {"electronics": 50.0}, bank, MPPT, dt=1.0)
    assert tick.load_shed
    assert tick.delivered_w == pytest.approx(0.0, abs=1e-9)
    assert bank2.soc == 0.0 and bank2.backup_soc == 0.0


def test_charge_efficiency_applied_to_stored_energy():
    bank = BatteryBank(soc=0.5, charge_efficiency=0.9)
    surplus_w = 100.0  # 100 Wh over an hour fits in the half-empty bank
    bank2, tick = mppt_step(
        surplus_w / MPPT.conversion_efficiency, {}, bank, MPPT, dt=3600.0
    )
    stored_wh = (bank2.soc - 0.5) * bank.cycling_capacity_wh
    assert stored_wh == pytest.approx(surplus_w * 0.9, rel=1e-9)
    # Ledger counts terminal energy, not stored energy.
    assert tick.battery_delta_wh == pytest.approx(surplus_w, rel=1e-9)


def test_full_bank_curtails_solar():
    bank = BatteryBank(soc=1.0)
    bank2, tick = mppt_step(88.0, {"electronics": 10.0}, bank, MPPT, dt=1.0)
    assert bank2.soc == 1.0
    assert tick.solar_available_w == pytest.approx(88.0)
    # Harvested solar shrinks to what the bus could actually absorb.
    assert tick.solar_in_w * MPPT.conversion_efficiency == pytest.approx(
        tick.delivered_w, rel=1e-9
    )


def test_negative_load_rejected():
    with pytest.raises(ValueError):
        mppt_step(0.0, {"servo": -1.0}, BatteryBank(), MPPT, dt=1.0)


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=120.0),
            st.floats(min_value=0.0, max_value=500.0),
        ),
        min_size=1,
        max_size=200,
    )
)
@settings(max_examples=60, deadline=None)
def test_soc_stays_in_unit_interval(sequence):
    bank = BatteryBank(soc=0.5, backup_soc=0.5)
    for solar, load in sequence:
        bank, tick = mppt_step(solar, {"electronics": load}, bank, MPPT, dt=30.0)
        assert 0.0 <= bank.soc <= 1.0
        assert 0.0 <= bank.backup_soc <= 1.0
        assert tick.delivered_w <= MPPT.load_current_limit * bank.nominal_voltage + 1e-9


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=120.0),
            st.floats(min_value=0.0, max_value=400.0),
        ),
        min_size=1,
        max_size=300,
    )
)
@settings(max_examples=40, deadline=None)
def test_ledger_closes_per_step(sequence):
    bank = BatteryBank(soc=0.5)
    dt = 7.0
    for solar, load in sequence:
        bank, tick = mppt_step(solar, {"electronics": load}, bank, MPPT, dt)
        lhs = tick.solar_in_w * MPPT.conversion_efficiency * dt / 3600.0
        rhs = tick.delivered_w * dt / 3600.0 + tick.battery_delta_wh
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_energy_report_empty():
    report = energy_report([])
    assert report.solar_in_wh == 0.0
    assert all(v == 0.0 for v in report.consumer_wh.values())
    assert report.backup_engagements == 0


def test_energy_report_single_tick_unit_arithmetic():
    bank = BatteryBank(soc=0.5)
    bank2, tick = mppt_step(100.0, {}, bank, MPPT, dt=36.0)
    report = energy_report([tick], bank)
    assert report.solar_in_wh == pytest.approx(1.0)


def test_energy_report_capacities():
    report = energy_report([], BatteryBank())
    assert report.installed_capacity_wh == pytest.approx(479.5, abs=0.1)
    assert report.cycling_capacity_wh == pytest.approx(359.6, abs=0.1)


def test_energy_report_rejects_unordered():
    bank = BatteryBank()
    _, t1 = mppt_step(0.0, {}, bank, MPPT, dt=1.0, t=5.0)
    _, t2 = mppt_step(0.0, {}, bank, MPPT, dt=1.0, t=4.0)
    with pytest.raises(ValueError):
        energy_report([t1, t2])


def test_energy_report_counts_backup_engagements():
    ticks = []
    bank = BatteryBank(soc=0.001, backup_soc=1.0)
    for i in range(40):
        solar = 200.0 if 10 <= i < 20 else 0.0
        bank, tick = mppt_step(solar, {"electronics": 111.0}, bank, MPPT,
                               dt=60.0, t=float(i))
        ticks.append(tick)
    report = energy_report(ticks, bank)
    assert report.backup_engagements == 2
    assert report.min_soc == 0.0
