"""Planar frame helpers: angle wrapping, local-frame/geodetic conversion, quantization."""

import math

EARTH_RADIUS_M = 6371000.0


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


def quantize(value: float, scale: float) -> int:
    """Fixed-point quantization, round half away from zero."""
    s = value * scale
    if s >= 0.0:
        return int(math.floor(s + 0.5))
    return int(math.ceil(s - 0.5))


class LocalFrame:
    """Equirectangular projection anchored at a scenario origin.

    Mission scales are a few km at most, so a flat-earth frame with the
    cos(lat) meridian correction is enough; lat/lon are converted once at
    ingestion and once on the way out.
    """

    def __init__(self, origin_lat_deg: float, origin_lon_deg: float):
        self.origin_lat = origin_lat_deg
        self.origin_lon = origin_lon_deg
        self._coslat = math.cos(math.radians(origin_lat_deg))

    def to_latlon(self, x: float, y: float) -> tuple[float, float]:
        lat = self.origin_lat + math.degrees(y / EARTH_RADIUS_M)
        lon = self.origin_lon + math.degrees(x / (EARTH_RADIUS_M * self._coslat))
        return lat, lon

    def to_xy(self, lat_deg: float, lon_deg: float) -> tuple[float, float]:
        y = math.radians(lat_deg - self.origin_lat) * EARTH_RADIUS_M
        x = math.radians(lon_deg - self.origin_lon) * EARTH_RADIUS_M * self._coslat
        return x, y
