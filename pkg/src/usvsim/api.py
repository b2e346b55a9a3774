"""HTTP face of the ground station.

Endpoints (times are unix seconds):

    GET  /vehicles                                -> list of vehicle ids
    GET  /vehicles/{id}/track?from&to             -> time-sorted positions
    GET  /vehicles/{id}/readings/{kind}?from&to   -> time-sorted readings
    GET  /vehicles/{id}/latest                    -> latest status
    POST /vehicles/{id}/mission                   -> new mission version
    GET  /vehicles/{id}/outbox                    -> command delivery status
    POST /vehicles/{id}/frames                    -> direct frame ingestion

Errors carry exactly one code: bad_request 400, not_found 404, conflict 409,
payload_too_large 413.
"""

import base64
import binascii

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import wire
from .station import ApiError, HTTP_STATUS, StationStore, TelemetryRecord


class TrackPoint(BaseModel):
    t: int
    lat: float
    lon: float
    heading_deg: float
    speed_m_s: float


class ReadingPoint(BaseModel):
    t: int
    value: float


class StatusFlags(BaseModel):
    capsized: bool
    thruster_on: bool
    on_backup: bool
    load_shed: bool


class LatestStatus(BaseModel):
    vehicle_id: str
    seq: int
    t: int
    lat: float
    lon: float
    heading_deg: float
    speed_m_s: float
    soc: float
    readings: dict[str, float]
    flags: StatusFlags


class WaypointIn(BaseModel):
    hour: int = Field(ge=0)
    lat: float
    lon: float


class MissionRequest(BaseModel):
    waypoints: list[WaypointIn]


class MissionResponse(BaseModel):
    vehicle_id: str
    version: int


class OutboxEntryOut(BaseModel):
    command_id: int
    vehicle_id: str
    version: int
    status: str
    t_queued: float
    t_sent: float | None = None
    t_acked: float | None = None


class FrameIn(BaseModel):
    frame_b64: str


class FrameAccepted(BaseModel):
    kind: str
    seq: int


def _latest_model(record: TelemetryRecord) -> LatestStatus:
    return LatestStatus(
        vehicle_id=record.vehicle_id,
        seq=record.seq,
        t=record.timestamp,
        lat=record.lat,
        lon=record.lon,
        heading_deg=record.heading_deg,
        speed_m_s=record.speed_m_s,
        soc=record.soc,
        readings=record.readings,
        flags=StatusFlags(**record.flags),
    )


def create_app(store: StationStore, clock=None) -> FastAPI:
    """Build the service around an existing store.

    clock is an optional zero-argument callable supplying "now" for mission
    timestamps; the default keeps 0.0 so in-process simulation drives time.
    """
    app = FastAPI(title="usv ground station", version="1.0")
    now = clock or (lambda: 0.0)

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=HTTP_STATUS[exc.code],
            content={"code": exc.code, "detail": exc.detail},
        )

    @app.get("/vehicles")
    def list_vehicles() -> list[str]:
        return store.vehicles()

    @app.get("/vehicles/{vehicle_id}/track")
    def track(
        vehicle_id: str,
        t_from: float = Query(default=0.0, alias="from"),
        t_to: float = Query(default=2**32, alias="to"),
    ) -> list[TrackPoint]:
        records = store.query_track(vehicle_id, t_from, t_to)
        return [
            TrackPoint(
                t=r.timestamp, lat=r.lat, lon=r.lon,
                heading_deg=r.heading_deg, speed_m_s=r.speed_m_s,
            )
            for r in records
        ]

    @app.get("/vehicles/{vehicle_id}/readings/{kind}")
    def readings(
        vehicle_id: str,
        kind: str,
        t_from: float = Query(default=0.0, alias="from"),
        t_to: float = Query(default=2**32, alias="to"),
    ) -> list[ReadingPoint]:
        rows = store.query_readings(vehicle_id, kind, t_from, t_to)
        return [ReadingPoint(t=t, value=v) for t, v in rows]

    @app.get("/vehicles/{vehicle_id}/latest")
    def latest(vehicle_id: str) -> LatestStatus:
        return _latest_model(store.latest(vehicle_id))

    @app.post("/vehicles/{vehicle_id}/mission")
    def post_mission(vehicle_id: str, mission: MissionRequest) -> MissionResponse:
        waypoints = [(wp.hour, wp.lat, wp.lon) for wp in mission.waypoints]
        version = store.post_mission(vehicle_id, waypoints, t=now())
        return MissionResponse(vehicle_id=vehicle_id, version=version)

    @app.get("/vehicles/{vehicle_id}/outbox")
    def outbox(vehicle_id: str) -> list[OutboxEntryOut]:
        return [
            OutboxEntryOut(
                command_id=e.command_id, vehicle_id=e.vehicle_id,
                version=e.version, status=e.status, t_queued=e.t_queued,
                t_sent=e.t_sent, t_acked=e.t_acked,
            )
            for e in store.outbox(vehicle_id)
        ]

    @app.post("/vehicles/{vehicle_id}/frames")
    def ingest_frame(vehicle_id: str, body: FrameIn) -> FrameAccepted:
        try:
            raw = base64.b64decode(body.frame_b64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ApiError.bad_request(f"invalid base64 frame: {exc}")
        try:
            frame = wire.decode(raw)
        except wire.FrameError as exc:
            raise ApiError.bad_request(f"undecodable frame: {exc}")
        if isinstance(frame, wire.TelemetryFrame):
            store.ingest(frame, vehicle_id)
            return FrameAccepted(kind="telemetry", seq=frame.seq)
        if isinstance(frame, wire.AckFrame):
            store.handle_ack(frame, vehicle_id, t=now())
            return FrameAccepted(kind="ack", seq=frame.seq)
        raise ApiError.bad_request("command frames are not ingestable")

    return app
