"""Slot loop: geometry, link metrics, per-slot OPT-SAT, aggregation."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkModel, atmospheric_transmissivity, free_space_transmissivity
from .config import ScenarioConfig, caps_arrays
from .orbital import constellation_positions, link_arrays, station_positions
from .scheduler import POLICIES, AssignmentProblem, check_policy_caps
from .scheduler.greedy import solve_greedy_baseline

# fixed so results do not depend on the worker count
CHUNK_SLOTS = 900


@dataclass(frozen=True)
class LinkRecord:
    sat_id: int
    pair_id: int
    psi: float
    chi: float
    count: float


@dataclass(frozen=True)
class SlotRecord:
    t: int
    objective: float
    links: tuple[LinkRecord, ...]

    @property
    def count(self) -> float:
        return math.fsum(link.count for link in self.links)


@dataclass
class SimulationReport:
    policy: str
    slots: list[SlotRecord]
    pair_totals: list[float]
    grand_total: float
    wall_clock: dict = field(default_factory=dict, compare=False)

    def slot_counts(self) -> list[float]:
        return [s.count for s in self.slots]

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "grand_total": self.grand_total,
            "pair_totals": list(self.pair_totals),
            "slots": [
                {
                    "t": s.t,
                    "objective": s.objective,
                    "count": s.count,
                    "links": [
                        {"sat_id": l.sat_id, "pair_id": l.pair_id, "psi_hz": l.psi, "chi": l.chi, "count": l.count}
                        for l in s.links
                    ],
                }
                for s in self.slots
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationReport":
        slots = [
            SlotRecord(
                int(s["t"]),
                float(s["objective"]),
                tuple(LinkRecord(int(l["sat_id"]), int(l["pair_id"]), float(l["psi_hz"]), float(l["chi"]), float(l["count"]))
                      for l in s["links"]),
            )
            for s in data["slots"]
        ]
        return cls(data["policy"], slots, [float(x) for x in data["pair_totals"]], float(data["grand_total"]))


@dataclass
class SlotLinks:
    """Link state of one chunk of slots; arrays are (slots, satellites, pairs)."""

    slots: np.ndarray
    rate: np.ndarray
    fidelity: np.ndarray
    elevation1: np.ndarray
    elevation2: np.ndarray
    indicator: np.ndarray


def compute_links(scenario: ScenarioConfig, slots: np.ndarray, model: LinkModel | None = None) -> SlotLinks:
    model = model or LinkModel(scenario.source)
    times = scenario.time.physical_time(slots)
    const = scenario.constellation
    sat = constellation_positions(const, times)
    gs = station_positions(scenario.stations, times, const.earth_radius)
    s, e, h = link_arrays(sat[:, :, None, :], gs[:, None, :, :], scenario.atmosphere_thickness)
    visible = e >= 0.0
    eta = np.where(visible, free_space_transmissivity(scenario.optics, s)
                   * atmospheric_transmissivity(scenario.optics, np.where(visible, h, 0.0)), 0.0)
    idx = np.array(scenario.pair_station_indices, dtype=np.int64)
    first, second = idx[:, 0], idx[:, 1]
    e1, e2 = e[:, :, first], e[:, :, second]
    both = visible[:, :, first] & visible[:, :, second]
    prob, fid = model.evaluate(eta[:, :, first], eta[:, :, second])
    rate = np.where(both, scenario.source.repetition_rate * prob, 0.0)
    fid = np.where(both, fid, 0.0)
    lim = scenario.elevation_limit
    indicator = both & (e1 >= lim) & (e2 >= lim) & (fid >= scenario.fidelity_threshold)
    return SlotLinks(np.asarray(slots), rate, fid, e1, e2, indicator)


def slot_problem(scenario: ScenarioConfig, links: SlotLinks, k: int, caps) -> AssignmentProblem:
    if scenario.weight_mode == "rate":
        weights = links.rate[k]
    else:
        weights = np.broadcast_to(np.asarray(scenario.request_rates, dtype=float), links.rate[k].shape)
    r, t, l = caps
    return AssignmentProblem(weights, links.indicator[k], scenario.pair_station_indices, r, t, l)


def build_problem(scenario: ScenarioConfig, slot: int) -> AssignmentProblem:
    """The OPT-SAT instance of a single slot."""
    links = compute_links(scenario, np.array([slot]))
    return slot_problem(scenario, links, 0, caps_arrays(scenario))


def _solver(scenario: ScenarioConfig, policy: str):
    if policy == "greedy_baseline" and scenario.pair_order is not None:
        order = scenario.pair_order
        return lambda p: solve_greedy_baseline(p, order)
    return POLICIES[policy]


def check_scenario(scenario: ScenarioConfig, policies) -> None:
    """Surface policy/cap inconsistencies before any slot is simulated."""
    n, m = scenario.constellation.num_satellites, len(scenario.pairs)
    r, t, l = caps_arrays(scenario)
    probe = AssignmentProblem(np.zeros((n, m)), np.zeros((n, m), dtype=bool), scenario.pair_station_indices, r, t, l)
    for policy in policies:
        check_policy_caps(policy, probe)


def _slot_counts(scenario: ScenarioConfig, policy_index: int, t: int, psi: np.ndarray) -> np.ndarray:
    expected = psi * scenario.time.slot_duration
    if scenario.count_mode == "expected":
        return expected
    rng = np.random.default_rng([scenario.seed, policy_index, int(t)])
    return rng.poisson(expected).astype(float)


def _run_chunk(args):
    scenario, policies, start, stop = args
    slots = np.arange(start, stop)
    links = compute_links(scenario, slots)
    caps = caps_arrays(scenario)
    solvers = [_solver(scenario, p) for p in policies]
    out = [[] for _ in policies]
    for k, t in enumerate(slots):
        t = int(t)
        if not links.indicator[k].any():
            for rec in out:
                rec.append(SlotRecord(t, 0.0, ()))
            continue
        problem = slot_problem(scenario, links, k, caps)
        for p_idx, solver in enumerate(solvers):
            assignment = solver(problem)
            chosen = assignment.links
            psi = np.array([links.rate[k, i, j] for i, j in chosen])
            counts = _slot_counts(scenario, p_idx, t, psi)
            recs = tuple(
                LinkRecord(i, j, float(links.rate[k, i, j]), float(links.fidelity[k, i, j]), float(c))
                for (i, j), c in zip(chosen, counts)
            )
            out[p_idx].append(SlotRecord(t, assignment.objective, recs))
    return out


def _chunks(scenario: ScenarioConfig):
    kappa = scenario.time.num_slots
    return [(s, min(s + CHUNK_SLOTS, kappa + 1)) for s in range(1, kappa + 1, CHUNK_SLOTS)]


def _report(policy: str, slots: list[SlotRecord], num_pairs: int, wall: dict) -> SimulationReport:
    per_pair: list[list[float]] = [[] for _ in range(num_pairs)]
    every = []
    for s in slots:
        for link in s.links:
            per_pair[link.pair_id].append(link.count)
            every.append(link.count)
    return SimulationReport(policy, slots, [math.fsum(x) for x in per_pair], math.fsum(every), wall)


def compare_policies(scenario: ScenarioConfig, policies, workers: int = 1) -> dict[str, SimulationReport]:
    """Run several policies on identical per-slot geometry and link metrics."""
    policies = list(dict.fromkeys(policies))
    check_scenario(scenario, policies)
    started = time.perf_counter()
    jobs = [(scenario, policies, a, b) for a, b in _chunks(scenario)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    elapsed = time.perf_counter() - started
    wall = {"seconds": elapsed, "slots": scenario.time.num_slots, "workers": workers, "policies": len(policies)}
    return {
        p: _report(p, [rec for part in parts for rec in part[idx]], len(scenario.pairs), dict(wall))
        for idx, p in enumerate(policies)
    }


def run_simulation(scenario: ScenarioConfig, workers: int = 1) -> SimulationReport:
    return compare_policies(scenario, [scenario.policy], workers)[scenario.policy]


@dataclass(frozen=True)
class SweepRow:
    altitude: float
    policy: str
    grand_total: float
    gap_vs_exact: float


def altitude_sweep(scenario: ScenarioConfig, altitudes, policies=("exact", "greedy_baseline"), workers: int = 1) -> list[SweepRow]:
    """Grand totals per (altitude, policy); the gap is relative to the exact optimum."""
    altitudes = [float(a) for a in altitudes]
    if not altitudes or any(a <= 0 for a in altitudes):
        raise ValueError("altitude sweep needs at least one positive altitude")
    rows = []
    for alt in altitudes:
        wanted = list(dict.fromkeys(policies))
        reports = compare_policies(scenario.with_altitude(alt), list(dict.fromkeys(["exact", *wanted])), workers)
        best = reports["exact"].grand_total
        for p in wanted:
            total = reports[p].grand_total
            gap = (best - total) / best if best > 0 else 0.0
            rows.append(SweepRow(alt, p, total, gap))
    return rows
