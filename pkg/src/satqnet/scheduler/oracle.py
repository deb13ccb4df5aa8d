"""Exhaustive reference solvers for small instances.

No bounding or problem-specific shortcuts: these only enumerate, so they can
check the real solvers.
"""
from __future__ import annotations

from itertools import permutations

import numpy as np

from .mwis import ConflictGraph
from .problem import Assignment, AssignmentProblem

MAX_ORACLE_CELLS = 36


class OracleTooLarge(ValueError):
    pass


def enumerate_optimum(problem: AssignmentProblem) -> Assignment:
    """Best assignment over every feasible 0/1 link matrix.

    Links with C_ij = 0 are enumerated too; they add nothing to the
    objective but still use capacity, exactly as in the integer program.
    """
    n, m = problem.weights.shape
    if n * m > MAX_ORACLE_CELLS:
        raise OracleTooLarge(f"instance has {n * m} cells; the exhaustive oracle handles at most {MAX_ORACLE_CELLS}")
    eff = problem.effective_weights()
    cells = [(i, j) for i in range(n) for j in range(m)]
    stations = problem.pair_stations
    res_t = problem.transmitter_caps.tolist()
    res_l = problem.pair_caps.tolist()
    res_r = problem.receiver_caps.tolist()
    best = [-1.0, ()]
    chosen: list[tuple[int, int]] = []

    def walk(k, value):
        if k == len(cells):
            if value > best[0]:
                best[0] = value
                best[1] = tuple(chosen)
            return
        i, j = cells[k]
        a, b = stations[j]
        walk(k + 1, value)
        if res_t[i] and res_l[j] and res_r[a] and res_r[b]:
            res_t[i] -= 1
            res_l[j] -= 1
            res_r[a] -= 1
            res_r[b] -= 1
            chosen.append((i, j))
            walk(k + 1, value + eff[i, j])
            chosen.pop()
            res_t[i] += 1
            res_l[j] += 1
            res_r[a] += 1
            res_r[b] += 1

    walk(0, 0.0)
    links = [(i, j) for i, j in best[1] if eff[i, j] > 0]
    return problem.assignment(links)


def permutation_optimum(weights) -> float:
    """Best total over all one-to-one assignments of a square matrix."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n == 0:
        return 0.0
    rows = np.arange(n)
    return max(float(w[rows, list(p)].sum()) for p in permutations(range(n)))


def brute_force_mwis(graph: ConflictGraph) -> tuple[float, tuple[int, ...]]:
    n = len(graph.weights)
    best = [0.0, ()]
    chosen: list[int] = []

    def walk(v, value, blocked):
        if v == n:
            if value > best[0]:
                best[0] = value
                best[1] = tuple(chosen)
            return
        walk(v + 1, value, blocked)
        if v not in blocked:
            chosen.append(v)
            walk(v + 1, value + graph.weights[v], blocked | graph.adjacency[v])
            chosen.pop()

    walk(0, 0.0, frozenset())
    return float(best[0]), best[1]
