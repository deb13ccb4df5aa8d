"""Exact OPT-SAT by branch-and-bound over the binary link variables."""
from __future__ import annotations

from .problem import Assignment, AssignmentProblem


def _components(cands, pair_stations):
    """Split candidates into groups that share no satellite or station."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for i, j, _ in cands:
        a, b = pair_stations[j]
        union(("s", i), ("g", a))
        union(("g", a), ("g", b))
    groups: dict = {}
    for c in cands:
        groups.setdefault(find(("s", c[0])), []).append(c)
    return list(groups.values())


def _branch_and_bound(cands, pair_stations, res_t, res_l, res_r):
    """Best subset of ``cands`` (sorted heaviest first) under residual caps.

    Branches include-first on the heaviest undecided candidate. The bound
    adds the heaviest admissible remaining candidates each satellite, pair
    and station could still take, and keeps the smallest of the three sums
    (the station sum counts every link twice, so it is halved).
    """
    k_total = len(cands)
    stations = [pair_stations[j] for _, j, _ in cands]
    best_value = 0.0
    best_set: list[int] = []
    chosen: list[int] = []

    def bound(k):
        sat_used: dict = {}
        pair_used: dict = {}
        gs_used: dict = {}
        sat_sum = pair_sum = gs_sum = 0.0
        for idx in range(k, k_total):
            i, j, w = cands[idx]
            a, b = stations[idx]
            if res_t[i] <= 0 or res_l[j] <= 0 or res_r[a] <= 0 or res_r[b] <= 0:
                continue
            u = sat_used.get(i, 0)
            if u < res_t[i]:
                sat_used[i] = u + 1
                sat_sum += w
            u = pair_used.get(j, 0)
            if u < res_l[j]:
                pair_used[j] = u + 1
                pair_sum += w
            for g in (a, b):
                u = gs_used.get(g, 0)
                if u < res_r[g]:
                    gs_used[g] = u + 1
                    gs_sum += w
        return min(sat_sum, pair_sum, 0.5 * gs_sum)

    def visit(k, value):
        nonlocal best_value, best_set
        if value > best_value:
            best_value = value
            best_set = chosen.copy()
        # the exclude branch continues this loop instead of recursing
        while k < k_total and value + bound(k) > best_value:
            i, j, w = cands[k]
            a, b = stations[k]
            if res_t[i] > 0 and res_l[j] > 0 and res_r[a] > 0 and res_r[b] > 0:
                res_t[i] -= 1
                res_l[j] -= 1
                res_r[a] -= 1
                res_r[b] -= 1
                chosen.append(k)
                visit(k + 1, value + w)
                chosen.pop()
                res_t[i] += 1
                res_l[j] += 1
                res_r[a] += 1
                res_r[b] += 1
            k += 1

    visit(0, 0.0)
    return [cands[k] for k in best_set]


def solve_exact(problem: AssignmentProblem) -> Assignment:
    """Optimal OPT-SAT assignment for one slot."""
    cands = problem.candidates()
    res_t = problem.transmitter_caps.tolist()
    res_l = problem.pair_caps.tolist()
    res_r = problem.receiver_caps.tolist()
    links = []
    for group in _components(cands, problem.pair_stations):
        links.extend((i, j) for i, j, _ in _branch_and_bound(group, problem.pair_stations, res_t, res_l, res_r))
    return problem.assignment(links)
