"""Polar constellation and ground-station geometry.

Spherical Earth, circular polar orbits, closed-form positions per time slot.
All vectors are Earth-centred inertial (ECI) in metres; the Earth rotates
about +z with a 24 h period and coincides with the inertial frame at time 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
MU_EARTH = 3.986004418e14
SIDEREAL_DAY_S = 86_400.0
DEFAULT_ATMOSPHERE_M = 10_000.0


class GeometryError(ValueError):
    """Invalid orbital or geometric input."""


@dataclass(frozen=True)
class Constellation:
    num_rings: int
    sats_per_ring: int
    altitude: float
    earth_radius: float = EARTH_RADIUS_M
    gravitational_parameter: float = MU_EARTH
    # longitude span over which ring ascending nodes are spread
    raan_spread_deg: float = 180.0
    # anomaly shift between adjacent rings
    phase_offset_deg: float = 0.0

    def __post_init__(self):
        if self.num_rings < 1 or self.sats_per_ring < 1:
            raise GeometryError("constellation needs at least one ring and one satellite per ring")
        if not self.altitude > 0:
            raise GeometryError(f"altitude must be positive, got {self.altitude}")

    @property
    def num_satellites(self) -> int:
        return self.num_rings * self.sats_per_ring

    @property
    def orbit_radius(self) -> float:
        return self.earth_radius + self.altitude

    @property
    def angular_rate(self) -> float:
        return math.sqrt(self.gravitational_parameter / self.orbit_radius**3)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.angular_rate

    def satellite_index(self, ring_index: int, phase_index: int) -> int:
        return ring_index * self.sats_per_ring + phase_index

    def ring_and_phase(self, sat_id: int) -> tuple[int, int]:
        return divmod(sat_id, self.sats_per_ring)


@dataclass(frozen=True)
class GroundStation:
    id: str
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise GeometryError(f"station {self.id!r}: latitude {self.latitude} out of [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise GeometryError(f"station {self.id!r}: longitude {self.longitude} out of [-180, 180]")


@dataclass(frozen=True)
class StationPair:
    id: int
    first: str
    second: str

    def __post_init__(self):
        if self.first == self.second:
            raise GeometryError(f"pair {self.id}: a station cannot be paired with itself")

    @property
    def stations(self) -> tuple[str, str]:
        return (self.first, self.second)


@dataclass(frozen=True)
class TimeGrid:
    slot_duration: float
    num_slots: int
    epoch_offset: float = 0.0

    def __post_init__(self):
        if not self.slot_duration > 0:
            raise GeometryError("slot duration must be positive")
        if self.num_slots < 1:
            raise GeometryError("need at least one slot")

    def physical_time(self, t):
        """Seconds since epoch at the start of slot ``t`` (1-based)."""
        return (np.asarray(t, dtype=float) - 1.0) * self.slot_duration + self.epoch_offset

    def slots(self) -> np.ndarray:
        return np.arange(1, self.num_slots + 1)


@dataclass(frozen=True)
class LinkGeometry:
    slant_distance: float
    elevation: float
    atmospheric_path: float | None
    visible: bool


def validate_pairs(pairs, stations) -> None:
    ids = [s.id for s in stations]
    if len(set(ids)) != len(ids):
        raise GeometryError("ground station ids must be unique")
    known = set(ids)
    seen = set()
    for pair in pairs:
        for sid in pair.stations:
            if sid not in known:
                raise GeometryError(f"pair {pair.id} references unknown station {sid!r}")
        key = frozenset(pair.stations)
        if key in seen:
            raise GeometryError(f"pair {pair.id} duplicates an earlier pair")
        seen.add(key)


def _ring_angles(constellation: Constellation):
    raan = np.arange(constellation.num_rings) * math.radians(constellation.raan_spread_deg) / constellation.num_rings
    ring_shift = np.arange(constellation.num_rings) * math.radians(constellation.phase_offset_deg)
    slot_anomaly = 2.0 * math.pi * np.arange(constellation.sats_per_ring) / constellation.sats_per_ring
    return raan, ring_shift, slot_anomaly


def satellite_position(constellation: Constellation, ring_index: int, phase_index: int, t, time_grid: TimeGrid) -> np.ndarray:
    if not 0 <= ring_index < constellation.num_rings:
        raise GeometryError(f"ring index {ring_index} out of range")
    if not 0 <= phase_index < constellation.sats_per_ring:
        raise GeometryError(f"phase index {phase_index} out of range")
    raan, ring_shift, slot_anomaly = _ring_angles(constellation)
    return _polar_position(
        constellation.orbit_radius,
        raan[ring_index],
        slot_anomaly[phase_index] + ring_shift[ring_index] + constellation.angular_rate * time_grid.physical_time(t),
    )


def _polar_position(radius, raan, anomaly):
    # inclination 90 deg: the orbit plane contains the z axis
    cu = np.cos(anomaly)
    return np.stack(
        np.broadcast_arrays(radius * np.cos(raan) * cu, radius * np.sin(raan) * cu, radius * np.sin(anomaly)),
        axis=-1,
    )


def constellation_positions(constellation: Constellation, times) -> np.ndarray:
    """Positions of every satellite at physical ``times`` (s), shape (T, N, 3).

    Satellite ``ring * sats_per_ring + phase`` is column ``sat_id``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    raan, ring_shift, slot_anomaly = _ring_angles(constellation)
    raan_n = np.repeat(raan, constellation.sats_per_ring)
    base = (ring_shift[:, None] + slot_anomaly[None, :]).ravel()
    anomaly = base[None, :] + constellation.angular_rate * times[:, None]
    return _polar_position(constellation.orbit_radius, raan_n[None, :], anomaly)


def ground_station_position(station: GroundStation, t, time_grid: TimeGrid, earth_radius: float = EARTH_RADIUS_M) -> np.ndarray:
    pos = station_positions([station], time_grid.physical_time(t), earth_radius)[:, 0, :]
    return pos[0] if np.ndim(t) == 0 else pos


def station_positions(stations, times, earth_radius: float = EARTH_RADIUS_M) -> np.ndarray:
    """Positions of ``stations`` at physical ``times`` (s), shape (T, G, 3)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lat = np.radians([s.latitude for s in stations])
    lon = np.radians([s.longitude for s in stations])
    rot = 2.0 * math.pi * times / SIDEREAL_DAY_S
    ang = lon[None, :] + rot[:, None]
    z = np.broadcast_to(earth_radius * np.sin(lat)[None, :], ang.shape)
    return np.stack([earth_radius * np.cos(lat)[None, :] * np.cos(ang), earth_radius * np.cos(lat)[None, :] * np.sin(ang), z], axis=-1)


def link_geometry(sat_position, station_position, constellation: Constellation | None = None,
                  atmosphere_thickness: float = DEFAULT_ATMOSPHERE_M) -> LinkGeometry:
    sat = np.asarray(sat_position, dtype=float)
    gs = np.asarray(station_position, dtype=float)
    r = float(np.linalg.norm(sat))
    earth_r = float(np.linalg.norm(gs))
    if r == 0.0 or earth_r == 0.0:
        raise GeometryError("zero-length position vector")
    if r <= earth_r:
        raise GeometryError("satellite must be above the station's radius")
    s, e, h = link_arrays(sat, gs, atmosphere_thickness)
    visible = bool(e >= 0.0)
    return LinkGeometry(float(s), float(e), float(h) if visible else None, visible)


def link_arrays(sat, gs, atmosphere_thickness: float = DEFAULT_ATMOSPHERE_M):
    """Vectorised slant distance, elevation and atmospheric path.

    ``sat`` and ``gs`` broadcast against each other over leading axes; the
    last axis holds xyz. The atmospheric path is NaN below the horizon.
    """
    sat = np.asarray(sat, dtype=float)
    gs = np.asarray(gs, dtype=float)
    diff = sat - gs
    s = np.sqrt(np.einsum("...k,...k->...", diff, diff))
    r = np.sqrt(np.einsum("...k,...k->...", sat, sat))
    earth_r = np.sqrt(np.einsum("...k,...k->...", gs, gs))
    cos_gamma = np.einsum("...k,...k->...", sat, gs) / (r * earth_r)
    sin_e = np.clip((r * np.clip(cos_gamma, -1.0, 1.0) - earth_r) / s, -1.0, 1.0)
    e = np.arcsin(sin_e)
    top = earth_r + atmosphere_thickness
    cos_e2 = 1.0 - sin_e * sin_e
    h = np.sqrt(top * top - earth_r * earth_r * cos_e2) - earth_r * sin_e
    h = np.where(e >= 0.0, h, np.nan)
    return s, e, h
