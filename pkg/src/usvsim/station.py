"""Ground-station backend: telemetry ingestion, track/reading queries,
mission versioning and the command outbox relayed over the satellite link.

State lives in memory, indexed for queries, and is optionally backed by an
append-only event log so a restarted service replays to the same state.
Ingestion is idempotent by (vehicle_id, seq); mission versions only grow;
outbox entries only move forward through queued -> sent -> acked.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from . import wire
from .links import DOWNLINK, MtuExceeded, SatChannel

READING_KINDS = ("conductivity", "temperature", "dissolved_oxygen", "ph")


class ApiError(Exception):
    """Service-level failure with exactly one machine-readable code."""

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail

    @classmethod
    def bad_request(cls, detail: str) -> "ApiError":
        return cls("bad_request", detail)

    @classmethod
    def not_found(cls, detail: str) -> "ApiError":
        return cls("not_found", detail)

    @classmethod
    def conflict(cls, detail: str) -> "ApiError":
        return cls("conflict", detail)

    @classmethod
    def payload_too_large(cls, detail: str) -> "ApiError":
        return cls("payload_too_large", detail)


HTTP_STATUS = {
    "bad_request": 400,
    "not_found": 404,
    "conflict": 409,
    "payload_too_large": 413,
}


@dataclass(frozen=True)
class TelemetryRecord:
    vehicle_id: str
    seq: int
    timestamp: int
    lat: float
    lon: float
    heading_deg: float
    speed_m_s: float
    soc: float
    readings: dict
    flags: dict

    @classmethod
    def from_frame(cls, vehicle_id: str, frame: wire.TelemetryFrame) -> "TelemetryRecord":
        return cls(
            vehicle_id=vehicle_id,
            seq=frame.seq,
            timestamp=frame.timestamp,
            lat=frame.lat_deg,
            lon=frame.lon_deg,
            heading_deg=frame.heading_deg,
            speed_m_s=frame.speed_m_s,
            soc=frame.soc_frac,
            readings={
                "conductivity": float(frame.conductivity_us),
                "temperature": frame.temperature_c,
                "dissolved_oxygen": frame.dissolved_oxygen_mg_l,
                "ph": frame.ph,
            },
            flags={
                "capsized": frame.capsized,
                "thruster_on": frame.thruster_on,
                "on_backup": frame.on_backup,
                "load_shed": frame.load_shed,
            },
        )


@dataclass
class OutboxEntry:
    command_id: int
    vehicle_id: str
    version: int
    frame: bytes
    status: str = "queued"           # queued -> sent -> acked
    t_queued: float = 0.0
    t_sent: float | None = None
    t_acked: float | None = None
    deliver_at: float | None = None


_STATUS_ORDER = {"queued": 0, "sent": 1, "acked": 2, "failed_validation": 3}


class StationStore:
    """The station's single source of truth, with optional durable log."""

    def __init__(self, data_dir: str | Path | None = None):
        self._telemetry: dict[tuple[str, int], TelemetryRecord] = {}
        self._missions: dict[str, list[list[tuple[int, float, float]]]] = {}
        self._outbox: list[OutboxEntry] = []
        self._next_command_id = 1
        self._log_path: Path | None = None
        self._log_fh = None
        if data_dir is not None:
            data_dir = Path(data_dir)
            data_dir.mkdir(parents=True, exist_ok=True)
            self._log_path = data_dir / "station_events.jsonl"
            if self._log_path.exists():
                self._replay_log()
            self._log_fh = self._log_path.open("a")

    # -- persistence ---------------------------------------------------------

    def _persist(self, event: dict) -> None:
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._log_fh.flush()

    def _replay_log(self) -> None:
        with self._log_path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                self._apply(event)

    def _apply(self, event: dict) -> None:
        op = event["op"]
        if op == "ingest":
            frame = wire.decode(bytes.fromhex(event["frame"]))
            self._ingest(frame, event["vehicle_id"])
        elif op == "mission":
            wps = [tuple(wp) for wp in event["waypoints"]]
            self._post_mission(event["vehicle_id"], wps, event["t"])
        elif op == "outbox":
            self._transition(event["command_id"], event["status"], event["t"])

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    # -- ingestion -----------------------------------------------------------

    def ingest(self, frame: wire.TelemetryFrame, vehicle_id: str) -> TelemetryRecord:
        """Store one decoded frame; duplicates return the existing record."""
        record, created = self._ingest(frame, vehicle_id)
        if created:
            self._persist(
                {"op": "ingest", "vehicle_id": vehicle_id,
                 "frame": wire.encode(frame).hex()}
            )
        return record

    def _ingest(self, frame: wire.TelemetryFrame, vehicle_id: str):
        key = (vehicle_id, frame.seq)
        existing = self._telemetry.get(key)
        if existing is not None:
            return existing, False
        record = TelemetryRecord.from_frame(vehicle_id, frame)
        self._telemetry[key] = record
        return record, True

    def handle_ack(self, ack: wire.AckFrame, vehicle_id: str, t: float) -> None:
        """Flip matching sent commands to acked (forward-only)."""
        for entry in self._outbox:
            if (
                entry.vehicle_id == vehicle_id
                and entry.version == ack.mission_version
                and entry.status == "sent"
            ):
                self.transition(entry.command_id, "acked", t)

    # -- queries --------------------------------------------------------------

    def vehicles(self) -> list[str]:
        ids = {vid for vid, _ in self._telemetry}
        ids.update(self._missions)
        return sorted(ids)

    def _known(self, vehicle_id: str) -> bool:
        return any(vid == vehicle_id for vid, _ in self._telemetry)

    def _records(self, vehicle_id: str) -> list[TelemetryRecord]:
        if not self._known(vehicle_id):
            raise ApiError.not_found(f"unknown vehicle {vehicle_id!r}")
        records = [r for (vid, _), r in self._telemetry.items() if vid == vehicle_id]
        records.sort(key=lambda r: (r.timestamp, r.seq))
        return records

    def query_track(self, vehicle_id: str, t_from: float, t_to: float):
        if t_from > t_to:
            raise ApiError.bad_request("time range is inverted")
        return [
            r for r in self._records(vehicle_id) if t_from <= r.timestamp <= t_to
        ]

    def query_readings(self, vehicle_id: str, kind: str, t_from: float, t_to: float):
        if kind not in READING_KINDS:
            raise ApiError.bad_request(f"unknown reading kind {kind!r}")
        if t_from > t_to:
            raise ApiError.bad_request("time range is inverted")
        return [
            (r.timestamp, r.readings[kind])
            for r in self._records(vehicle_id)
            if t_from <= r.timestamp <= t_to
        ]

    def latest(self, vehicle_id: str) -> TelemetryRecord:
        records = self._records(vehicle_id)
        return records[-1]

    # -- missions and outbox ---------------------------------------------------

    def post_mission(
        self, vehicle_id: str,
        waypoints: list[tuple[int, float, float]],
        t: float = 0.0,
    ) -> int:
        """Persist a new mission version and queue its command frame."""
        version = self._post_mission(vehicle_id, waypoints, t)
        self._persist(
            {"op": "mission", "vehicle_id": vehicle_id, "t": t,
             "waypoints": [list(wp) for wp in waypoints]}
        )
        return version

    def _post_mission(self, vehicle_id, waypoints, t) -> int:
        if not waypoints:
            raise ApiError.bad_request("mission must contain at least one waypoint")
        if len(waypoints) > wire.MAX_COMMAND_WAYPOINTS:
            raise ApiError.payload_too_large(
                f"{len(waypoints)} waypoints exceed the "
                f"{wire.MAX_COMMAND_WAYPOINTS}-waypoint command limit"
            )
        hours = [wp[0] for wp in waypoints]
        if any(h2 <= h1 for h1, h2 in zip(hours, hours[1:])):
            raise ApiError.bad_request("waypoint hours must be strictly increasing")
        for hour, lat, lon in waypoints:
            if hour < 0:
                raise ApiError.bad_request("hour_index must be non-negative")
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ApiError.bad_request("lat/lon out of range")

        versions = self._missions.setdefault(vehicle_id, [])
        version = len(versions) + 1
        if version > 0xFF:
            raise ApiError.conflict("mission version space exhausted")
        frame = wire.CommandFrame.from_waypoints(version, t, list(waypoints))
        encoded = wire.encode(frame)
        versions.append(list(waypoints))
        entry = OutboxEntry(
            command_id=self._next_command_id,
            vehicle_id=vehicle_id,
            version=version,
            frame=encoded,
            t_queued=t,
        )
        self._next_command_id += 1
        self._outbox.append(entry)
        return version

    def mission_version_count(self, vehicle_id: str) -> int:
        return len(self._missions.get(vehicle_id, []))

    def mission(self, vehicle_id: str, version: int):
        versions = self._missions.get(vehicle_id, [])
        if not 1 <= version <= len(versions):
            raise ApiError.not_found(f"no mission version {version}")
        return list(versions[version - 1])

    def outbox(self, vehicle_id: str | None = None) -> list[OutboxEntry]:
        return [
            e for e in self._outbox
            if vehicle_id is None or e.vehicle_id == vehicle_id
        ]

    def transition(self, command_id: int, status: str, t: float) -> None:
        self._transition(command_id, status, t)
        self._persist({"op": "outbox", "command_id": command_id,
                       "status": status, "t": t})

    def _transition(self, command_id: int, status: str, t: float) -> None:
        for entry in self._outbox:
            if entry.command_id != command_id:
                continue
            if _STATUS_ORDER.get(status, -1) < _STATUS_ORDER.get(entry.status, 99):
                raise ApiError.conflict(
                    f"cannot move command {command_id} from "
                    f"{entry.status} back to {status}"
                )
            entry.status = status
            if status == "sent":
                entry.t_sent = t
            elif status == "acked":
                entry.t_acked = t
            return
        raise ApiError.not_found(f"no command {command_id}")

    def relay_step(self, t: float, channel: SatChannel) -> list[OutboxEntry]:
        """Hand every queued command to the satellite channel, FIFO."""
        sent = []
        for entry in self._outbox:
            if entry.status != "queued":
                continue
            try:
                delivery = channel.send(entry.frame, t, DOWNLINK)
            except MtuExceeded:
                # post_mission validates sizes; reaching this is a defect signal.
                self.transition(entry.command_id, "failed_validation", t)
                continue
            entry.deliver_at = delivery.deliver_at
            self.transition(entry.command_id, "sent", t)
            sent.append(entry)
        return sent

    # -- export -----------------------------------------------------------------

    def export_snapshot(self) -> bytes:
        """Canonical byte-exact dump of the whole store (for replay checks)."""
        state = {
            "telemetry": [
                asdict(self._telemetry[key])
                for key in sorted(self._telemetry.keys())
            ],
            "missions": {
                vid: versions for vid, versions in sorted(self._missions.items())
            },
            "outbox": [
                {
                    "command_id": e.command_id,
                    "vehicle_id": e.vehicle_id,
                    "version": e.version,
                    "frame": e.frame.hex(),
                    "status": e.status,
                    "t_queued": e.t_queued,
                    "t_sent": e.t_sent,
                    "t_acked": e.t_acked,
                }
                for e in self._outbox
            ],
        }
        return json.dumps(state, sort_keys=True, separators=(",", ":")).encode()
