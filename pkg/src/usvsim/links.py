"""Link simulation: satellite store-and-forward, keyed short-range RF, and
the full-resolution local logbook.

The satellite channel queues frames until an availability window opens, then
delivers them latency seconds later, preserving per-direction send order and
charging a per-message cost. The RF path delivers only within range and only
when the keyed authentication tag verifies; drops are logged with a reason,
never raised.
"""

import hmac
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

UPLINK = "up"      # vehicle -> station
DOWNLINK = "down"  # station -> vehicle

RF_TAG_BYTES = 8


@dataclass(frozen=True)
class WindowSchedule:
    """Link availability: periodic open windows minus outage intervals.

    period == 0 means always available (outages still apply). A window with
    period P and open length D is open on [k*P + phase, k*P + phase + D).
    """

    period: float = 0.0
    open_duration: float = 0.0
    phase: float = 0.0
    outages: tuple[tuple[float, float], ...] = ()

    def _in_outage(self, t: float) -> tuple[bool, float]:
        for start, end in self.outages:
            if start <= t < end:
                return True, end
        return False, t

    def _periodic_open(self, t: float) -> tuple[bool, float]:
        if self.period <= 0.0:
            return True, t
        local = (t - self.phase) % self.period
        if local < self.open_duration:
            return True, t
        return False, t + (self.period - local)

    def is_open(self, t: float) -> bool:
        out, _ = self._in_outage(t)
        if out:
            return False
        ok, _ = self._periodic_open(t)
        return ok

    def next_open(self, t: float) -> float:
        """Earliest time >= t at which the link is available."""
        for _ in range(10_000):
            out, t_clear = self._in_outage(t)
            if out:
                t = t_clear
                continue
            ok, t_next = self._periodic_open(t)
            if ok:
                return t
            t = t_next
        raise RuntimeError("no availability window found (degenerate schedule)")


@dataclass(frozen=True)
class SatLinkSpec:
    uplink_mtu: int = 340
    downlink_mtu: int = 270
    latency: float = 60.0
    per_message_cost: float = 1.0
    windows: WindowSchedule = field(default_factory=WindowSchedule)

    def mtu(self, direction: str) -> int:
        return self.uplink_mtu if direction == UPLINK else self.downlink_mtu


@dataclass(frozen=True)
class RfLinkSpec:
    max_range: float = 2000.0
    key: bytes = b"\x00" * 16
    frequency_label: str = "868 MHz"


class MtuExceeded(Exception):
    def __init__(self, size: int, mtu: int):
        super().__init__(f"frame of {size} bytes exceeds {mtu}-byte MTU")
        self.size = size
        self.mtu = mtu


@dataclass(frozen=True)
class Delivery:
    deliver_at: float
    serial: int
    direction: str
    data: bytes
    cost: float


class SatChannel:
    """Event-queue model of the satellite relay for one vehicle-station pair."""

    def __init__(self, spec: SatLinkSpec):
        self.spec = spec
        self._pending: list[Delivery] = []
        self._serial = 0
        self._last_deliver_at = {UPLINK: -math.inf, DOWNLINK: -math.inf}
        self.total_cost = 0.0
        self.log: list[dict] = []

    def send(self, data: bytes, t: float, direction: str) -> Delivery:
        """Queue one frame; raises MtuExceeded instead of fragmenting."""
        mtu = self.spec.mtu(direction)
        if len(data) > mtu:
            self.log.append(
                {"t": t, "dir": direction, "event": "reject_mtu", "size": len(data)}
            )
            raise MtuExceeded(len(data), mtu)
        window = self.spec.windows.next_open(t)
        deliver_at = max(window + self.spec.latency, self._last_deliver_at[direction])
        self._last_deliver_at[direction] = deliver_at
        self._serial += 1
        d = Delivery(deliver_at, self._serial, direction, data, self.spec.per_message_cost)
        self._pending.append(d)
        self.total_cost += d.cost
        self.log.append(
            {"t": t, "dir": direction, "event": "send", "size": len(data),
             "deliver_at": deliver_at, "cost": d.cost}
        )
        return d

    def due(self, t: float) -> list[Delivery]:
        """Pop every delivery scheduled at or before t, in delivery order."""
        ready = sorted(
            (d for d in self._pending if d.deliver_at <= t),
            key=lambda d: (d.deliver_at, d.serial),
        )
        if ready:
            done = set(id(d) for d in ready)
            self._pending = [d for d in self._pending if id(d) not in done]
            for d in ready:
                self.log.append(
                    {"t": t, "dir": d.direction, "event": "deliver",
                     "size": len(d.data), "sent_serial": d.serial}
                )
        return ready

    @property
    def pending_count(self) -> int:
        return len(self._pending)


def rf_seal(payload: bytes, key: bytes) -> bytes:
    """Append the keyed authentication tag (authenticity, not secrecy)."""
    tag = hmac.new(key, payload, hashlib.sha256).digest()[:RF_TAG_BYTES]
    return payload + tag


def rf_transmit(
    frame_bytes: bytes,
    key: bytes,
    link: RfLinkSpec,
    sender_pos: tuple[float, float],
    receiver_pos: tuple[float, float],
) -> tuple[bytes | None, str]:
    """Attempt an RF delivery; returns (payload or None, reason).

    Reasons: "delivered", "out_of_range", "key_mismatch". The sender seals
    with its own key; the receiver verifies against the link's key, so a
    mismatched key is indistinguishable from corruption and is dropped.
    """
    dx = sender_pos[0] - receiver_pos[0]
    dy = sender_pos[1] - receiver_pos[1]
    if math.hypot(dx, dy) > link.max_range:
        return None, "out_of_range"
    sealed = rf_seal(frame_bytes, key)
    payload, tag = sealed[:-RF_TAG_BYTES], sealed[-RF_TAG_BYTES:]
    expect = hmac.new(link.key, payload, hashlib.sha256).digest()[:RF_TAG_BYTES]
    if not hmac.compare_digest(tag, expect):
        return None, "key_mismatch"
    return payload, "delivered"


class Logbook:
    """Append-only, monotone-timestamp record store, optionally file-backed.

    Everything the uplink policy leaves out of the telemetry frame lands
    here at full resolution; one JSON object per line when file-backed.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[dict] = []
        self._last_t = -math.inf
        self._fh = None
        if self.path is not None:
            if self.path.exists():
                with self.path.open() as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            rec = json.loads(line)
                            self.records.append(rec)
                            self._last_t = rec["t"]
            self._fh = self.path.open("a")

    def append(self, record: dict) -> None:
        t = record.get("t")
        if t is None:
            raise ValueError("logbook records need a 't' field")
        if t < self._last_t:
            raise ValueError("logbook timestamps must be monotone")
        self._last_t = t
        self.records.append(record)
        if self._fh is not None:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.flush()
            self._fh.close()
            self._fh = None

    def __len__(self) -> int:
        return len(self.records)
