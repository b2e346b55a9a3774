"""Binary telemetry/command/ack frame codec.

Frame layout (all multi-byte fields big-endian):

    magic 0x55 0x53 | version u8 | msg_type u8 | seq u16 | timestamp u32
    | payload | crc32 u32

The CRC-32 (IEEE polynomial, as in zlib) covers every byte before the
trailer. Payloads:

    telemetry (type 1, 25 bytes):
        lat i32 1e-7 deg | lon i32 1e-7 deg | heading i16 0.01 deg
        | speed u16 0.001 m/s | soc u16 0.01 % | temperature i16 0.01 degC
        | conductivity u32 uS/cm | dissolved_oxygen u16 0.01 mg/L
        | ph u16 0.001 | flags u8
    command (type 2, 1 + 10*count bytes):
        count u8 | count * (hour u16 | lat i32 1e-7 deg | lon i32 1e-7 deg)
        seq carries the mission version.
    ack (type 3, 1 byte):
        mission_version u8

Total sizes: telemetry 39 bytes, ack 15 bytes, command 11 + 10*count + 4.
"""

import struct
from binascii import crc32
from dataclasses import dataclass, field

from .geo import quantize

MAGIC = b"\x55\x53"
PROTOCOL_VERSION = 1

MSG_TELEMETRY = 1
MSG_COMMAND = 2
MSG_ACK = 3

FLAG_CAPSIZED = 0x01
FLAG_THRUSTER_ON = 0x02
FLAG_ON_BACKUP = 0x04
FLAG_LOAD_SHED = 0x08

MAX_COMMAND_WAYPOINTS = 25

_HEADER = struct.Struct(">2sBBHI")
_TELEMETRY_PAYLOAD = struct.Struct(">iihHHhIHHB")
_COMMAND_ENTRY = struct.Struct(">Hii")
_CRC = struct.Struct(">I")

TELEMETRY_FRAME_SIZE = _HEADER.size + _TELEMETRY_PAYLOAD.size + _CRC.size  # 39
ACK_FRAME_SIZE = _HEADER.size + 1 + _CRC.size                              # 15
MIN_FRAME_SIZE = ACK_FRAME_SIZE


class FrameError(Exception):
    """Base class for every codec failure."""


class TruncatedFrameError(FrameError):
    pass


class BadMagicError(FrameError):
    pass


class BadVersionError(FrameError):
    pass


class BadCrcError(FrameError):
    pass


class FrameFormatError(FrameError):
    """Unknown message type, inconsistent length or out-of-spec field."""


class FrameValidationError(FrameError):
    """Raised at construction time for frames that violate their contract."""


def _clamp(v: int, lo: int, hi: int) -> int:
    return min(hi, max(lo, v))


@dataclass(frozen=True)
class TelemetryFrame:
    """Essential-information uplink record, quantized to wire units."""

    seq: int
    timestamp: int
    lat_e7: int
    lon_e7: int
    heading_cdeg: int
    speed_mm_s: int
    soc_cpct: int
    temp_cdegc: int
    conductivity_us: int
    do_cmg: int
    ph_milli: int
    flags: int = 0

    msg_type = MSG_TELEMETRY

    def __post_init__(self):
        if not 0 <= self.seq <= 0xFFFF:
            raise FrameValidationError("seq out of u16 range")
        if not 0 <= self.timestamp <= 0xFFFFFFFF:
            raise FrameValidationError("timestamp out of u32 range")

    @classmethod
    def from_values(
        cls,
        seq: int,
        timestamp: float,
        lat_deg: float,
        lon_deg: float,
        heading_deg: float,
        speed_m_s: float,
        soc_frac: float,
        temperature_c: float,
        conductivity_us: float,
        dissolved_oxygen_mg_l: float,
        ph: float,
        capsized: bool = False,
        thruster_on: bool = False,
        on_backup: bool = False,
        load_shed: bool = False,
    ) -> "TelemetryFrame":
        flags = (
            (FLAG_CAPSIZED if capsized else 0)
            | (FLAG_THRUSTER_ON if thruster_on else 0)
            | (FLAG_ON_BACKUP if on_backup else 0)
            | (FLAG_LOAD_SHED if load_shed else 0)
        )
        return cls(
            seq=seq,
            timestamp=int(timestamp) & 0xFFFFFFFF,
            lat_e7=_clamp(quantize(lat_deg, 1e7), -(2**31), 2**31 - 1),
            lon_e7=_clamp(quantize(lon_deg, 1e7), -(2**31), 2**31 - 1),
            heading_cdeg=_clamp(quantize(heading_deg, 100), -(2**15), 2**15 - 1),
            speed_mm_s=_clamp(quantize(speed_m_s, 1000), 0, 0xFFFF),
            soc_cpct=_clamp(quantize(soc_frac * 100.0, 100), 0, 0xFFFF),
            temp_cdegc=_clamp(quantize(temperature_c, 100), -(2**15), 2**15 - 1),
            conductivity_us=_clamp(quantize(conductivity_us, 1), 0, 2**32 - 1),
            do_cmg=_clamp(quantize(dissolved_oxygen_mg_l, 100), 0, 0xFFFF),
            ph_milli=_clamp(quantize(ph, 1000), 0, 0xFFFF),
            flags=flags,
        )

    @property
    def lat_deg(self) -> float:
        return self.lat_e7 / 1e7

    @property
    def lon_deg(self) -> float:
        return self.lon_e7 / 1e7

    @property
    def heading_deg(self) -> float:
        return self.heading_cdeg / 100.0

    @property
    def speed_m_s(self) -> float:
        return self.speed_mm_s / 1000.0

    @property
    def soc_frac(self) -> float:
        return self.soc_cpct / 10000.0

    @property
    def temperature_c(self) -> float:
        return self.temp_cdegc / 100.0

    @property
    def dissolved_oxygen_mg_l(self) -> float:
        return self.do_cmg / 100.0

    @property
    def ph(self) -> float:
        return self.ph_milli / 1000.0

    @property
    def capsized(self) -> bool:
        return bool(self.flags & FLAG_CAPSIZED)

    @property
    def thruster_on(self) -> bool:
        return bool(self.flags & FLAG_THRUSTER_ON)

    @property
    def on_backup(self) -> bool:
        return bool(self.flags & FLAG_ON_BACKUP)

    @property
    def load_shed(self) -> bool:
        return bool(self.flags & FLAG_LOAD_SHED)

    def payload(self) -> bytes:
        return _TELEMETRY_PAYLOAD.pack(
            self.lat_e7,
            self.lon_e7,
            self.heading_cdeg,
            self.speed_mm_s,
            self.soc_cpct,
            self.temp_cdegc,
            self.conductivity_us,
            self.do_cmg,
            self.ph_milli,
            self.flags,
        )


@dataclass(frozen=True)
class CommandFrame:
    """Waypoint upload: seq carries the mission version being delivered."""

    seq: int
    timestamp: int
    entries: tuple[tuple[int, int, int], ...] = field(default_factory=tuple)

    msg_type = MSG_COMMAND

    def __post_init__(self):
        if len(self.entries) > MAX_COMMAND_WAYPOINTS:
            raise FrameValidationError(
                f"command frames carry at most {MAX_COMMAND_WAYPOINTS} waypoints"
            )
        for hour, lat_e7, lon_e7 in self.entries:
            if not 0 <= hour <= 0xFFFF:
                raise FrameValidationError("hour_index out of u16 range")
            if not -(2**31) <= lat_e7 < 2**31 or not -(2**31) <= lon_e7 < 2**31:
                raise FrameValidationError("lat/lon out of i32 range")

    @classmethod
    def from_waypoints(
        cls, seq: int, timestamp: float,
        waypoints: list[tuple[int, float, float]],
    ) -> "CommandFrame":
        entries = tuple(
            (hour, quantize(lat, 1e7), quantize(lon, 1e7))
            for hour, lat, lon in waypoints
        )
        return cls(seq=seq, timestamp=int(timestamp) & 0xFFFFFFFF, entries=entries)

    @property
    def count(self) -> int:
        return len(self.entries)

    def payload(self) -> bytes:
        parts = [bytes([self.count])]
        parts.extend(_COMMAND_ENTRY.pack(*entry) for entry in self.entries)
        return b"".join(parts)


@dataclass(frozen=True)
class AckFrame:
    """Vehicle-side receipt for a delivered mission version."""

    seq: int
    timestamp: int
    mission_version: int

    msg_type = MSG_ACK

    def __post_init__(self):
        if not 0 <= self.mission_version <= 0xFF:
            raise FrameValidationError("mission_version out of u8 range")

    def payload(self) -> bytes:
        return bytes([self.mission_version])


Frame = TelemetryFrame | CommandFrame | AckFrame


def encode(frame: Frame) -> bytes:
    head = _HEADER.pack(
        MAGIC, PROTOCOL_VERSION, frame.msg_type,
        frame.seq, frame.timestamp,
    )
    body = head + frame.payload()
    return body + _CRC.pack(crc32(body))


def decode(data: bytes) -> Frame:
    """Parse one frame, rejecting bad magic, version, CRC and truncation."""
    if len(data) < MIN_FRAME_SIZE:
        raise TruncatedFrameError(f"frame shorter than {MIN_FRAME_SIZE} bytes")
    magic, version, msg_type, seq, timestamp = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != PROTOCOL_VERSION:
        raise BadVersionError(f"unsupported version {version}")

    if msg_type == MSG_TELEMETRY:
        expected = TELEMETRY_FRAME_SIZE
    elif msg_type == MSG_ACK:
        expected = ACK_FRAME_SIZE
    elif msg_type == MSG_COMMAND:
        count = data[_HEADER.size]
        expected = _HEADER.size + 1 + _COMMAND_ENTRY.size * count + _CRC.size
    else:
        raise FrameFormatError(f"unknown message type {msg_type}")
    if len(data) < expected:
        raise TruncatedFrameError(f"expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise FrameFormatError(f"expected {expected} bytes, got {len(data)}")

    (crc_recv,) = _CRC.unpack_from(data, expected - _CRC.size)
    if crc32(data[: expected - _CRC.size]) != crc_recv:
        raise BadCrcError("CRC mismatch")

    body = data[_HEADER.size : expected - _CRC.size]
    if msg_type == MSG_TELEMETRY:
        fields = _TELEMETRY_PAYLOAD.unpack(body)
        return TelemetryFrame(seq, timestamp, *fields)
    if msg_type == MSG_ACK:
        return AckFrame(seq, timestamp, body[0])
    count = body[0]
    if count > MAX_COMMAND_WAYPOINTS:
        raise FrameFormatError(f"command count {count} exceeds {MAX_COMMAND_WAYPOINTS}")
    entries = tuple(
        _COMMAND_ENTRY.unpack_from(body, 1 + i * _COMMAND_ENTRY.size)
        for i in range(count)
    )
    return CommandFrame(seq, timestamp, entries)
