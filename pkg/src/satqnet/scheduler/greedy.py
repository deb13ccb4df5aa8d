"""Pair-by-pair greedy baseline scheduler."""
from __future__ import annotations

from .problem import Assignment, AssignmentProblem


def solve_greedy_baseline(problem: AssignmentProblem, pair_order=None) -> Assignment:
    """Serve pairs in ``pair_order`` (default ascending id); each pair repeatedly
    takes the heaviest still-available covering satellite, lowest id on ties,
    until its cap is reached."""
    res_t = problem.transmitter_caps.tolist()
    res_r = problem.receiver_caps.tolist()
    eff = problem.effective_weights()
    order = range(problem.num_pairs) if pair_order is None else pair_order
    links = []
    for j in order:
        a, b = problem.pair_stations[j]
        col = eff[:, j]
        ranked = sorted((i for i in range(problem.num_satellites) if col[i] > 0), key=lambda i: (-col[i], i))
        taken = 0
        for i in ranked:
            if taken >= problem.pair_caps[j] or res_r[a] <= 0 or res_r[b] <= 0:
                break
            if res_t[i] <= 0:
                continue
            links.append((i, j))
            res_t[i] -= 1
            res_r[a] -= 1
            res_r[b] -= 1
            taken += 1
    return problem.assignment(links)
