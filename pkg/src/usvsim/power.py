"""Solar array, MPPT charge controller and battery bank energy ledger.

Coulomb counting at constant nominal voltage keeps every step's ledger exact:
harvested solar power (after conversion) equals delivered load plus the
battery terminal delta. Three of the four packs cycle; the fourth is an
isolated backup engaged only when the active bank is empty.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

CONSUMERS = ("servo", "thruster", "winch", "electronics", "comms")


@dataclass(frozen=True)
class SolarArraySpec:
    panel_count: int = 3
    panel_open_voltage: float = 18.0   # V
    panel_peak_power: float = 30.0     # W per panel at full irradiance
    diode_drop: float = 0.4            # V, blocking diode forward drop


@dataclass(frozen=True)
class MpptSpec:
    conversion_efficiency: float = 0.95
    load_current_limit: float = 30.0   # A at the nominal bus voltage


@dataclass(frozen=True)
class BatteryBank:
    """Four parallel packs, one kept as backup and excluded from cycling."""

    pack_count: int = 4
    active_packs: int = 3
    total_capacity_ah: float = 43.2
    nominal_voltage: float = 11.1
    soc: float = 0.9
    backup_soc: float = 1.0
    charge_efficiency: float = 1.0

    def __post_init__(self):
        if not 0 <= self.active_packs < self.pack_count:
            raise ValueError("active_packs must leave at least one backup pack")
        if not (0.0 <= self.soc <= 1.0 and 0.0 <= self.backup_soc <= 1.0):
            raise ValueError("soc must lie in [0, 1]")

    @property
    def installed_capacity_wh(self) -> float:
        return self.total_capacity_ah * self.nominal_voltage

    @property
    def cycling_capacity_wh(self) -> float:
        per_pack = self.total_capacity_ah / self.pack_count
        return per_pack * self.active_packs * self.nominal_voltage

    @property
    def backup_capacity_wh(self) -> float:
        return (self.total_capacity_ah / self.pack_count) * self.nominal_voltage


@dataclass(frozen=True)
class PowerTick:
    """Per-step energy bookkeeping row.

    Ledger identity: solar_in_w * dt = sum(loads_w) * dt + battery_delta_wh
    (solar_in_w is already net of MPPT conversion and any curtailment).
    """

    t: float
    dt: float
    solar_available_w: float
    solar_in_w: float
    loads_w: dict = field(default_factory=dict)
    requested_w: float = 0.0
    shed_w: float = 0.0
    battery_delta_wh: float = 0.0
    soc_after: float = 0.0
    backup_soc_after: float = 0.0
    on_backup: bool = False
    load_shed: bool = False

    @property
    def delivered_w(self) -> float:
        return sum(self.loads_w.values())


def solar_power(irradiance_frac: float, spec: SolarArraySpec) -> float:
    """Array output in W for a normalized irradiance level.

    The blocking diodes cost a fraction of the panel voltage and guarantee
    the output can never go negative (no reverse flow at night).
    """
    if not 0.0 <= irradiance_frac <= 1.0:
        raise ValueError("irradiance_frac must lie in [0, 1]")
    w = (
        spec.panel_count
        * spec.panel_peak_power
        * irradiance_frac
        * (1.0 - spec.diode_drop / spec.panel_open_voltage)
    )
    return max(0.0, w)


def mppt_step(
    solar_w: float,
    loads_w: Mapping[str, float],
    bank: BatteryBank,
    spec: MpptSpec,
    dt: float,
    t: float = 0.0,
) -> tuple[BatteryBank, PowerTick]:
    """One charge-controller step: cap the load at 30 A, balance the bus.

    Surplus solar charges the active packs (clamped at full, surplus beyond
    that is curtailed and excluded from solar_in); a deficit discharges the
    active packs and then the backup pack, shedding load only when both are
    empty. soc never leaves [0, 1] and the per-step ledger closes exactly.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    for name, w in loads_w.items():
        if w < 0:
            raise ValueError(f"negative load for {name}")

    requested = sum(loads_w.values())
    cap_w = spec.load_current_limit * bank.nominal_voltage
    load_shed = requested > cap_w
    scale = (cap_w / requested) if load_shed else 1.0
    delivered = {name: w * scale for name, w in loads_w.items()}
    delivered_total = sum(delivered.values())

    hours = dt / 3600.0
    bus_in_w = solar_w * spec.conversion_efficiency
    net_wh = (bus_in_w - delivered_total) * hours

    soc = bank.soc
    backup = bank.backup_soc
    on_backup = False

    if net_wh >= 0.0:
        room_wh = (1.0 - soc) * bank.cycling_capacity_wh
        accept_limit = room_wh / bank.charge_efficiency if bank.charge_efficiency > 0 else 0.0
        accepted_wh = min(net_wh, accept_limit)
        soc = min(1.0, soc + accepted_wh * bank.charge_efficiency / bank.cycling_capacity_wh)
        battery_delta_wh = accepted_wh
        solar_in_w = (delivered_total * hours + battery_delta_wh) / (hours) if hours else 0.0
    else:
        need_wh = -net_wh
        take_active = min(need_wh, soc * bank.cycling_capacity_wh)
        soc = max(0.0, soc - take_active / bank.cycling_capacity_wh)
        remaining = need_wh - take_active
        take_backup = 0.0
        if remaining > 1e-15:
            on_backup = True
            take_backup = min(remaining, backup * bank.backup_capacity_wh)
            backup = max(0.0, backup - take_backup / bank.backup_capacity_wh)
            remaining -= take_backup
        if remaining > 1e-12:
            # Both banks empty: the bus browns out; unpowered load is shed.
            short_w = remaining / hours
            load_shed = True
            factor = max(0.0, 1.0 - short_w / delivered_total) if delivered_total else 0.0
            delivered = {name: w * factor for name, w in delivered.items()}
            delivered_total = sum(delivered.values())
        battery_delta_wh = -(take_active + take_backup)
        solar_in_w = (delivered_total * hours + battery_delta_wh) / hours if hours else 0.0

    tick = PowerTick(
        t=t,
        dt=dt,
        solar_available_w=solar_w,
        solar_in_w=solar_in_w / spec.conversion_efficiency,
        loads_w=delivered,
        requested_w=requested,
        shed_w=max(0.0, requested - delivered_total),
        battery_delta_wh=battery_delta_wh,
        soc_after=soc,
        backup_soc_after=backup,
        on_backup=on_backup,
        load_shed=load_shed,
    )
    return replace(bank, soc=soc, backup_soc=backup), tick


@dataclass(frozen=True)
class EnergySummary:
    solar_in_wh: float
    consumer_wh: dict
    battery_delta_wh: float
    min_soc: float
    backup_engagements: int
    shed_steps: int
    installed_capacity_wh: float
    cycling_capacity_wh: float


def energy_report(ticks: list[PowerTick], bank: BatteryBank | None = None) -> EnergySummary:
    """Deterministic totals over a time-ordered tick sequence."""
    last_t = -math.inf
    for tick in ticks:
        if tick.t < last_t:
            raise ValueError("ticks must be time-ordered")
        last_t = tick.t

    bank = bank or BatteryBank()
    hours = [tick.dt / 3600.0 for tick in ticks]
    solar_in = math.fsum(
        tick.solar_in_w * h for tick, h in zip(ticks, hours)
    )
    consumer_wh = {
        name: math.fsum(tick.loads_w.get(name, 0.0) * h for tick, h in zip(ticks, hours))
        for name in CONSUMERS
    }
    delta = math.fsum(tick.battery_delta_wh for tick in ticks)
    min_soc = min((tick.soc_after for tick in ticks), default=1.0)
    engagements = 0
    prev = False
    for tick in ticks:
        if tick.on_backup and not prev:
            engagements += 1
        prev = tick.on_backup
    shed_steps = sum(1 for tick in ticks if tick.load_shed)
    return EnergySummary(
        solar_in_wh=solar_in,
        consumer_wh=consumer_wh,
        battery_delta_wh=delta,
        min_soc=min_soc,
        backup_engagements=engagements,
        shed_steps=shed_steps,
        installed_capacity_wh=bank.installed_capacity_wh,
        cycling_capacity_wh=bank.cycling_capacity_wh,
    )
