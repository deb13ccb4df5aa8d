"""Scenario configuration: JSON schema, presets, and conversion to model objects.

Physical quantities carry their unit in the key name. The extinction
coefficient is given per kilometre and converted to SI here.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, replace

import jsonschema
import numpy as np

from .channel import OpticalConfig, SourceConfig
from .orbital import Constellation, GroundStation, StationPair, TimeGrid, validate_pairs

POLICY_NAMES = ("exact", "hungarian", "mwis_greedy", "greedy_baseline")

# public city-centre coordinates (deg); scenario data, not ground truth
CITIES = {
    "Toronto": (43.6532, -79.3832),
    "New York City": (40.7128, -74.0060),
    "London": (51.5074, -0.1278),
    "Singapore": (1.3521, 103.8198),
    "Sydney": (-33.8688, 151.2093),
    "Rio de Janeiro": (-22.9068, -43.1729),
    "Mumbai": (19.0760, 72.8777),
}


class ConfigError(ValueError):
    """Configuration does not satisfy the schema or is inconsistent."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_POS = {"type": "number", "exclusiveMinimum": 0}
_CAP = {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "N"},
                  {"type": "array", "items": {"type": "integer", "minimum": 0}}]}

SCHEMA = {
    "type": "object",
    "required": ["constellation", "stations", "pairs", "time", "optics", "source", "limits"],
    "properties": {
        "constellation": {
            "type": "object",
            "required": ["num_rings", "sats_per_ring", "altitude_m"],
            "properties": {
                "num_rings": {"type": "integer", "minimum": 1},
                "sats_per_ring": {"type": "integer", "minimum": 1},
                "altitude_m": _POS,
                "phase_offset_deg": {"type": "number"},
                "raan_spread_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 360},
                "earth_radius_m": _POS,
            },
            "additionalProperties": False,
        },
        "stations": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["id", "lat_deg", "lon_deg"],
                "properties": {
                    "id": {"type": "string"},
                    "lat_deg": {"type": "number", "minimum": -90, "maximum": 90},
                    "lon_deg": {"type": "number", "minimum": -180, "maximum": 180},
                },
                "additionalProperties": False,
            },
        },
        "pairs": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
        "time": {
            "type": "object",
            "required": ["slot_s", "num_slots"],
            "properties": {
                "slot_s": _POS,
                "num_slots": {"type": "integer", "minimum": 1},
                "epoch_offset_s": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "optics": {
            "type": "object",
            "required": ["d_t_m", "d_r_m", "wavelength_m", "alpha_per_km"],
            "properties": {
                "d_t_m": _POS,
                "d_r_m": _POS,
                "wavelength_m": _POS,
                "alpha_per_km": _POS,
                "atmosphere_km": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "source": {
            "type": "object",
            "required": ["n_s", "rep_rate_hz"],
            "properties": {
                "n_s": {"type": "number", "minimum": 0},
                "rep_rate_hz": _POS,
                "dark_click_prob": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "sign": {"enum": [1, -1]},
            },
            "additionalProperties": False,
        },
        "limits": {
            "type": "object",
            "required": ["f_th", "theta_e_deg"],
            "properties": {
                "f_th": {"type": "number", "minimum": 0, "maximum": 1},
                "theta_e_deg": {"type": "number", "minimum": 0, "exclusiveMaximum": 90},
                "r_g": _CAP,
                "t_i": _CAP,
                "l_j": _CAP,
            },
            "additionalProperties": False,
        },
        "policy": {"enum": list(POLICY_NAMES)},
        "weight_mode": {"enum": ["rate", "request"]},
        "request_rates": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "pair_order": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "count_mode": {"enum": ["expected", "sampled"]},
        "seed": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}


def _json_path(error: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in error.absolute_path]
    if error.validator == "required":
        missing = error.message.split("'")[1] if "'" in error.message else ""
        parts.append(missing)
    return ".".join(parts) or "<root>"


def validate_config(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _json_path(err))


def config_hash(raw: dict) -> str:
    """SHA-256 of the canonical (sorted-key, compact) JSON form."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class ScenarioConfig:
    constellation: Constellation
    stations: tuple[GroundStation, ...]
    pairs: tuple[StationPair, ...]
    time: TimeGrid
    optics: OpticalConfig
    atmosphere_thickness: float
    source: SourceConfig
    fidelity_threshold: float
    elevation_limit: float  # radians
    receiver_caps: tuple[int, ...]
    transmitter_caps: tuple[int, ...]
    pair_caps: tuple[int, ...]
    policy: str = "exact"
    weight_mode: str = "rate"
    request_rates: tuple[float, ...] | None = None
    pair_order: tuple[int, ...] | None = None
    count_mode: str = "expected"
    seed: int = 0

    @property
    def station_index(self) -> dict[str, int]:
        return {s.id: g for g, s in enumerate(self.stations)}

    @property
    def pair_station_indices(self) -> list[tuple[int, int]]:
        idx = self.station_index
        return [(idx[p.first], idx[p.second]) for p in self.pairs]

    def with_altitude(self, altitude: float) -> "ScenarioConfig":
        return replace(self, constellation=replace(self.constellation, altitude=float(altitude)))

    def with_policy(self, policy: str) -> "ScenarioConfig":
        if policy not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {policy!r}", "policy")
        return replace(self, policy=policy)


def _expand_cap(value, size: int, n_sats: int, path: str) -> tuple[int, ...]:
    if value == "N":
        value = n_sats
    if isinstance(value, list):
        if len(value) != size:
            raise ConfigError(f"expected {size} entries, got {len(value)}", path)
        return tuple(int(v) for v in value)
    return (int(value),) * size


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    validate_config(raw)
    c = raw["constellation"]
    constellation = Constellation(
        num_rings=c["num_rings"],
        sats_per_ring=c["sats_per_ring"],
        altitude=float(c["altitude_m"]),
        earth_radius=float(c.get("earth_radius_m", 6_371_000.0)),
        raan_spread_deg=float(c.get("raan_spread_deg", 180.0)),
        phase_offset_deg=float(c.get("phase_offset_deg", 0.0)),
    )
    stations = tuple(GroundStation(s["id"], float(s["lat_deg"]), float(s["lon_deg"])) for s in raw["stations"])
    ids = [s.id for s in stations]
    if len(set(ids)) != len(ids):
        raise ConfigError("station ids must be unique", "stations")
    pairs = []
    for j, (a, b) in enumerate(raw["pairs"]):
        for sid in (a, b):
            if sid not in ids:
                raise ConfigError(f"unknown station {sid!r}", f"pairs.{j}")
        if a == b:
            raise ConfigError("a pair needs two distinct stations", f"pairs.{j}")
        pairs.append(StationPair(j, a, b))
    try:
        validate_pairs(pairs, stations)
    except ValueError as exc:
        raise ConfigError(str(exc), "pairs") from None
    t = raw["time"]
    grid = TimeGrid(float(t["slot_s"]), int(t["num_slots"]), float(t.get("epoch_offset_s", 0.0)))
    o = raw["optics"]
    optics = OpticalConfig(float(o["d_t_m"]), float(o["d_r_m"]), float(o["wavelength_m"]), float(o["alpha_per_km"]) / 1000.0)
    s = raw["source"]
    source = SourceConfig(float(s["n_s"]), float(s["rep_rate_hz"]), float(s.get("dark_click_prob", 0.0)), sign=int(s.get("sign", 1)))
    lim = raw["limits"]
    n_sats = constellation.num_satellites
    r_caps = _expand_cap(lim.get("r_g", "N"), len(stations), n_sats, "limits.r_g")
    t_caps = _expand_cap(lim.get("t_i", 1), n_sats, n_sats, "limits.t_i")
    l_caps = _expand_cap(lim.get("l_j", 1), len(pairs), n_sats, "limits.l_j")
    idx = {sid: g for g, sid in enumerate(ids)}
    for j, p in enumerate(pairs):
        for sid in p.stations:
            if r_caps[idx[sid]] < l_caps[j]:
                raise ConfigError(f"station {sid!r} has fewer receivers than pair {j} may use (r_g >= l_j required)", "limits.r_g")
    weight_mode = raw.get("weight_mode", "rate")
    rates = raw.get("request_rates")
    if weight_mode == "request":
        if rates is None:
            raise ConfigError("weight_mode 'request' needs a request_rates table", "request_rates")
        if len(rates) != len(pairs):
            raise ConfigError(f"expected {len(pairs)} request rates, got {len(rates)}", "request_rates")
    order = raw.get("pair_order")
    if order is not None and sorted(order) != list(range(len(pairs))):
        raise ConfigError("pair_order must be a permutation of the pair ids", "pair_order")
    return ScenarioConfig(
        constellation=constellation,
        stations=stations,
        pairs=tuple(pairs),
        time=grid,
        optics=optics,
        atmosphere_thickness=float(o.get("atmosphere_km", 10.0)) * 1000.0,
        source=source,
        fidelity_threshold=float(lim["f_th"]),
        elevation_limit=math.radians(float(lim["theta_e_deg"])),
        receiver_caps=r_caps,
        transmitter_caps=t_caps,
        pair_caps=l_caps,
        policy=raw.get("policy", "exact"),
        weight_mode=weight_mode,
        request_rates=tuple(float(r) for r in rates) if rates is not None else None,
        pair_order=tuple(order) if order is not None else None,
        count_mode=raw.get("count_mode", "expected"),
        seed=int(raw.get("seed", 0)),
    )


def _city_block(names):
    return [{"id": n, "lat_deg": CITIES[n][0], "lon_deg": CITIES[n][1]} for n in names]


def _all_pairs(names):
    return [[a, b] for k, a in enumerate(names) for b in names[k + 1:]]


_COMMON = {
    "optics": {"d_t_m": 0.2, "d_r_m": 2.0, "wavelength_m": 737e-9, "alpha_per_km": 0.028125, "atmosphere_km": 10.0},
    "source": {"n_s": 0.0078, "rep_rate_hz": 1e10, "dark_click_prob": 1e-6},
    "limits": {"f_th": 0.95, "theta_e_deg": 0.0, "r_g": "N", "t_i": 1, "l_j": 1},
    "policy": "exact",
    "weight_mode": "rate",
}

DESK_CITIES = ("Toronto", "New York City", "Rio de Janeiro")
FULL_CITIES = tuple(CITIES)


def preset(name: str) -> dict:
    """Raw JSON config for a named preset (``desk`` or ``full``)."""
    if name == "desk":
        body = {
            "constellation": {"num_rings": 4, "sats_per_ring": 4, "altitude_m": 2_000_000.0},
            "stations": _city_block(DESK_CITIES),
            "pairs": _all_pairs(DESK_CITIES),
            "time": {"slot_s": 1.0, "num_slots": 3600},
        }
    elif name == "full":
        body = {
            "constellation": {"num_rings": 10, "sats_per_ring": 10, "altitude_m": 2_000_000.0},
            "stations": _city_block(FULL_CITIES),
            "pairs": _all_pairs(FULL_CITIES),
            "time": {"slot_s": 1.0, "num_slots": 86_400},
        }
    else:
        raise ConfigError(f"unknown preset {name!r}; choose 'desk' or 'full'")
    body.update(copy.deepcopy(_COMMON))
    return body


PRESETS = ("desk", "full")


def caps_arrays(scenario: ScenarioConfig):
    return (np.array(scenario.receiver_caps, dtype=np.int64),
            np.array(scenario.transmitter_caps, dtype=np.int64),
            np.array(scenario.pair_caps, dtype=np.int64))
