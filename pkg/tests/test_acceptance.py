"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line
in the terminal summary."""
import hashlib
import math
import time

import numpy as np
import pytest

from fock_oracle import enumerate_link
from instances import random_problem
from satqnet.channel import SourceConfig, apply_pure_loss, emission_probability, metrics_from_eta, source_state
from satqnet.cli import main
from satqnet.config import preset, scenario_from_dict
from satqnet.scheduler import (
    AssignmentProblem,
    ConflictGraph,
    is_feasible,
    solve_exact,
    solve_hungarian,
    solve_mwis_greedy,
    weighted_average_degree,
)
from satqnet.scheduler.oracle import brute_force_mwis, enumerate_optimum, permutation_optimum
from satqnet.simulation import altitude_sweep, compare_policies

DESK_ALTITUDES = [500e3, 1000e3, 2000e3, 4000e3, 6000e3]


def detail(request, text):
    request.node.user_properties.append(("detail", text))


@pytest.mark.criterion(1, "exact solver equals exhaustive enumeration on 100 instances")
def test_solver_oracle_equivalence(request):
    rng = np.random.default_rng(1)
    started = time.perf_counter()
    mismatches = infeasible = 0
    for _ in range(100):
        p = random_problem(rng, max_sats=6, max_pairs=6, max_cap=2)
        got = solve_exact(p)
        ref = enumerate_optimum(p)
        mismatches += got.objective != ref.objective
        infeasible += not is_feasible(p, got.links)
    elapsed = time.perf_counter() - started
    detail(request, f"{mismatches} mismatches, {infeasible} infeasible, {elapsed:.2f} s")
    assert mismatches == 0 and infeasible == 0
    assert elapsed < 10.0


@pytest.mark.criterion(2, "Hungarian equals permutation brute force and exact solver")
def test_hungarian_equivalence(request):
    rng = np.random.default_rng(2)
    started = time.perf_counter()
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        # integer weights so equality is exact in floating point
        p = AssignmentProblem.build(rng.integers(0, 1000, (n, n)).astype(float), r_g=n)
        h = solve_hungarian(p)
        bad += not (h.objective == permutation_optimum(p.weights) == solve_exact(p).objective and is_feasible(p, h.links))
    elapsed = time.perf_counter() - started
    detail(request, f"{bad} mismatches, {elapsed:.2f} s")
    assert bad == 0
    assert elapsed < 10.0


@pytest.mark.criterion(3, "greedy MWIS weight >= optimum / (gamma_bar + 1)")
def test_mwis_bound(request):
    rng = np.random.default_rng(3)
    violations = 0
    worst = math.inf
    for _ in range(100):
        n = int(rng.integers(1, 13))
        w = rng.random(n) * 10.0
        p_edge = rng.random()
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p_edge]
        g = ConflictGraph.from_edges(w, edges)
        res = solve_mwis_greedy(g)
        best, _ = brute_force_mwis(g)
        bound = best / (weighted_average_degree(g) + 1.0)
        violations += (not g.is_independent(res.independent_set)) or res.weight < bound
        worst = min(worst, res.weight / bound)
    detail(request, f"{violations} violations, min weight/bound {worst:.3f}")
    assert violations == 0


@pytest.mark.criterion(4, "link model equals exhaustive Fock-outcome enumeration within 1e-10")
def test_channel_oracle(request):
    worst = 0.0
    for n_s in (0.005, 0.05):
        for e1 in (0.01, 0.5, 1.0):
            for e2 in (0.01, 0.5, 1.0):
                for dark in (0.0, 1e-6):
                    got = metrics_from_eta(SourceConfig(n_s, 1e9, dark), e1, e2)
                    ref = enumerate_link(n_s, e1, e2, dark)
                    worst = max(worst, abs(got[0] - ref[0]), abs(got[0] * got[1] - ref[0] * ref[1]))
    detail(request, f"max abs difference {worst:.2e}")
    assert worst < 1e-10


@pytest.mark.criterion(5, "emission normalisation, trace preservation, low-brightness fidelity")
def test_physics_sanity(request):
    norm_err = max(abs(math.fsum(emission_probability(n_s, n) for n in range(201)) - 1.0)
                   for n_s in np.linspace(0.0, 5.0, 51))
    psi = source_state(SourceConfig(0.3, 1e9)).vector()
    grid = np.linspace(0.0, 1.0, 11)
    trace_err = max(abs(np.trace(apply_pure_loss(psi, a, b).density) - 1.0) for a in grid for b in grid)
    _, fid = metrics_from_eta(SourceConfig(1e-4, 1e9, 0.0), 1.0, 1.0)
    detail(request, f"normalisation {norm_err:.1e}, trace {trace_err:.1e}, fidelity {fid:.8f}")
    assert norm_err < 1e-9
    assert trace_err < 1e-12
    assert fid > 0.999


@pytest.mark.criterion(6, "desk altitude sweep: decreasing totals, growing exact-vs-greedy gap")
def test_altitude_sweep_shape(request):
    rows = altitude_sweep(scenario_from_dict(preset("desk")), DESK_ALTITUDES, ("exact", "greedy_baseline"))
    exact = [r.grand_total for r in rows if r.policy == "exact"]
    greedy = [r.grand_total for r in rows if r.policy == "greedy_baseline"]
    gaps = [r.gap_vs_exact for r in rows if r.policy == "greedy_baseline"]
    detail(request, "exact " + ", ".join(f"{x:.3g}" for x in exact) + "; gap " + ", ".join(f"{100 * g:.2f}%" for g in gaps))
    tail = exact[2:]
    assert all(b < a for a, b in zip(tail, tail[1:]))
    assert all(e >= g for e, g in zip(exact, greedy))
    assert all(b >= a for a, b in zip(gaps[2:], gaps[3:]))


@pytest.mark.criterion(7, "per-slot exact objective dominates every heuristic")
def test_dominance(request):
    checked = violations = 0
    for alt in (1000e3, 4000e3, 6000e3):
        raw = preset("desk")
        raw["constellation"]["altitude_m"] = alt
        raw["time"]["num_slots"] = 1800
        unit = {**raw, "limits": {**raw["limits"], "r_g": 1}}
        for cfg, policies in ((raw, ["exact", "greedy_baseline", "hungarian"]),
                              (unit, ["exact", "greedy_baseline", "mwis_greedy"])):
            reports = compare_policies(scenario_from_dict(cfg), policies)
            best = reports["exact"].slots
            for name in policies[1:]:
                for a, b in zip(best, reports[name].slots):
                    checked += 1
                    violations += a.objective < b.objective - 1e-9 * max(1.0, a.objective)
    detail(request, f"{violations} violations over {checked} slot comparisons")
    assert violations == 0


def _sha(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _timed_run(name, out, workers):
    started = time.perf_counter()
    code = main(["run", f"preset:{name}", "-o", str(out), "--workers", str(workers)])
    return code, time.perf_counter() - started


@pytest.mark.slow
@pytest.mark.criterion(8, "byte-identical reports; desk < 60 s, full < 30 min")
def test_determinism_and_runtime(request, tmp_path):
    desk_a = _timed_run("desk", tmp_path / "desk_a", 1)
    desk_b = _timed_run("desk", tmp_path / "desk_b", 1)
    full_a = _timed_run("full", tmp_path / "full_a", 1)
    full_b = _timed_run("full", tmp_path / "full_b", 2)
    same_desk = _sha(tmp_path / "desk_a" / "report.json") == _sha(tmp_path / "desk_b" / "report.json")
    same_full = _sha(tmp_path / "full_a" / "report.json") == _sha(tmp_path / "full_b" / "report.json")
    detail(request, f"desk {desk_a[1]:.1f} s, full {full_a[1]:.0f} s / {full_b[1]:.0f} s (1 and 2 workers), "
                    f"identical desk={same_desk} full={same_full}")
    assert {desk_a[0], desk_b[0], full_a[0], full_b[0]} == {0}
    assert same_desk and same_full
    assert max(desk_a[1], desk_b[1]) < 60.0
    assert max(full_a[1], full_b[1]) < 30 * 60.0
