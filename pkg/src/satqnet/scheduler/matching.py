"""Maximum-weight bipartite matching (Hungarian method) for OPT-SAT special cases."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import Assignment, AssignmentProblem, PreconditionError


def hungarian(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost assignment of every row of an ``n x m`` matrix, ``n <= m``.

    Shortest augmenting paths with vertex potentials, O(n^2 m). Returns
    ``col_of_row`` so that row ``r`` is assigned column ``col_of_row[r]``.
    Surplus columns behave like zero-padding to a square matrix.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n > m:
        raise ValueError("hungarian expects at most as many rows as columns")
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    # 1-based bookkeeping; column 0 is the virtual root
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    row_of_col = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)
    for row in range(1, n + 1):
        row_of_col[0] = row
        col0 = 0
        minv = np.full(m, math.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[col0] = True
            r0 = row_of_col[col0]
            free = ~used[1:]
            reduced = cost[r0 - 1] - u[r0] - v[1:]
            better = free & (reduced < minv)
            minv[better] = reduced[better]
            way[1:][better] = col0
            cand = np.where(free, minv, math.inf)
            col1 = int(np.argmin(cand)) + 1
            delta = cand[col1 - 1]
            used_cols = np.nonzero(used)[0]
            u[row_of_col[used_cols]] += delta
            v[used_cols] -= delta
            minv[free] -= delta
            col0 = col1
            if row_of_col[col0] == 0:
                break
        while col0:
            col1 = way[col0]
            row_of_col[col0] = row_of_col[col1]
            col0 = col1
    col_of_row = np.full(n, -1, dtype=np.int64)
    for col in range(1, m + 1):
        if row_of_col[col]:
            col_of_row[row_of_col[col] - 1] = col - 1
    return col_of_row


def max_weight_matching(weights: np.ndarray) -> list[tuple[int, int]]:
    """Maximum-weight matching of a non-negative rectangular matrix.

    Solved on the shorter side, which is equivalent to zero-padding to a
    square matrix; matched pairs of zero weight are dropped.
    """
    w = np.asarray(weights, dtype=float)
    rows, cols = w.shape
    if rows == 0 or cols == 0:
        return []
    if rows <= cols:
        pairs = [(r, int(c)) for r, c in enumerate(hungarian(-w))]
    else:
        pairs = [(int(r), c) for c, r in enumerate(hungarian(-w.T))]
    return sorted((r, c) for r, c in pairs if w[r, c] > 0)


def solve_hungarian(problem: AssignmentProblem) -> Assignment:
    """OPT-SAT with one transmitter per satellite, one link per pair and ample receivers."""
    if (problem.transmitter_caps != 1).any() or (problem.pair_caps != 1).any():
        raise PreconditionError("the Hungarian solver needs T_i = 1 and L_j = 1; use solve_exact")
    if not problem.receivers_nonbinding():
        raise PreconditionError("receiver caps bind for this instance; the Hungarian solver does not apply, use solve_exact")
    eff = problem.effective_weights()
    # rows and columns without a usable link cannot change the optimum
    rows = np.nonzero((eff > 0).any(axis=1))[0]
    cols = np.nonzero((eff > 0).any(axis=0))[0]
    if rows.size == 0:
        return problem.assignment([])
    matched = max_weight_matching(eff[np.ix_(rows, cols)])
    return problem.assignment((rows[r], cols[c]) for r, c in matched)


@dataclass
class ExpandedProblem:
    """Copy-expanded bipartite graph for T_i, L_j >= 1.

    Rows are satellite copies followed by one ``edge-out`` node per original
    link; columns are one ``edge-in`` node per link followed by pair copies.
    A link is selected when its edge-in node meets a copy of its satellite
    and its edge-out node meets a copy of its pair; otherwise the two edge
    nodes match each other. This keeps x_ij binary, which plain copying of
    satellites and pairs would not.
    """

    weights: np.ndarray
    sat_copies: list[int]
    pair_copies: list[int]
    edges: list[tuple[int, int]]
    anchor: float

    def links_from_matching(self, matching) -> list[tuple[int, int]]:
        n_sat = len(self.sat_copies)
        n_edge = len(self.edges)
        chosen = []
        for r, c in matching:
            if r < n_sat and c < n_edge:
                chosen.append(self.edges[c])
        return chosen


def expand_copies(problem: AssignmentProblem) -> ExpandedProblem:
    if not problem.receivers_nonbinding():
        raise PreconditionError("copy expansion needs non-binding receiver caps (R_g = N); use solve_exact")
    cands = problem.candidates()
    edges = [(i, j) for i, j, _ in cands]
    w = [c[2] for c in cands]
    sat_copies = [i for i in range(problem.num_satellites) for _ in range(int(problem.transmitter_caps[i]))]
    pair_copies = [j for j in range(problem.num_pairs) for _ in range(int(problem.pair_caps[j]))]
    # anchor exceeds any weight a broken gadget could recover elsewhere
    anchor = 2.0 * sum(w) + 1.0
    n_sat, n_edge = len(sat_copies), len(edges)
    mat = np.zeros((n_sat + n_edge, n_edge + len(pair_copies)))
    sat_rows: dict[int, list[int]] = {}
    for r, i in enumerate(sat_copies):
        sat_rows.setdefault(i, []).append(r)
    pair_cols: dict[int, list[int]] = {}
    for c, j in enumerate(pair_copies):
        pair_cols.setdefault(j, []).append(n_edge + c)
    for e, ((i, j), we) in enumerate(zip(edges, w)):
        mat[n_sat + e, e] = 2.0 * anchor
        for r in sat_rows.get(i, []):
            mat[r, e] = anchor + we / 2.0
        for c in pair_cols.get(j, []):
            mat[n_sat + e, c] = anchor + we / 2.0
    return ExpandedProblem(mat, sat_copies, pair_copies, edges, anchor)


def solve_hungarian_expanded(problem: AssignmentProblem) -> Assignment:
    """OPT-SAT with R_g non-binding and arbitrary T_i, L_j via copy expansion."""
    expanded = expand_copies(problem)
    if expanded.weights.size == 0:
        return problem.assignment([])
    matching = max_weight_matching(expanded.weights)
    return problem.assignment(expanded.links_from_matching(matching))
