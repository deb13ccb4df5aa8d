"""Conflict-graph reduction for single-transmitter/single-receiver slots and the
weighted-degree greedy independent set heuristic."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import Assignment, AssignmentProblem, PreconditionError


@dataclass
class ConflictGraph:
    vertices: list[tuple[int, int]]  # (satellite, pair)
    weights: np.ndarray
    adjacency: list[set[int]]

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in sorted(nbrs) if u < v]

    @classmethod
    def from_edges(cls, weights, edges, vertices=None) -> "ConflictGraph":
        weights = np.asarray(weights, dtype=float)
        adj: list[set[int]] = [set() for _ in range(len(weights))]
        for u, v in edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        if vertices is None:
            vertices = [(v, -1) for v in range(len(weights))]
        return cls(list(vertices), weights, adj)

    def is_independent(self, subset) -> bool:
        s = set(subset)
        return all(not (self.adjacency[v] & s) for v in s)


@dataclass(frozen=True)
class MwisResult:
    independent_set: tuple[int, ...]
    weight: float
    weighted_average_degree: float
    ratio_bound: float


def build_conflict_graph(problem: AssignmentProblem) -> ConflictGraph:
    if (problem.receiver_caps != 1).any() or (problem.transmitter_caps != 1).any() or (problem.pair_caps != 1).any():
        raise PreconditionError("the conflict-graph reduction needs R_g = T_i = L_j = 1")
    ii, jj = np.nonzero(problem.indicators)
    vertices = [(int(i), int(j)) for i, j in zip(ii, jj)]
    weights = np.array([problem.weights[i, j] for i, j in vertices], dtype=float)
    stations = [set(problem.pair_stations[j]) for _, j in vertices]
    adj: list[set[int]] = [set() for _ in vertices]
    for u in range(len(vertices)):
        for v in range(u + 1, len(vertices)):
            if vertices[u][0] == vertices[v][0] or stations[u] & stations[v]:
                adj[u].add(v)
                adj[v].add(u)
    return ConflictGraph(vertices, weights, adj)


def weighted_average_degree(graph: ConflictGraph) -> float:
    total = float(graph.weights.sum())
    if total <= 0.0:
        return 0.0
    return float((graph.weights * graph.degrees).sum()) / total


def solve_mwis_greedy(graph: ConflictGraph) -> MwisResult:
    """Repeatedly take the vertex of smallest weighted degree, drop its neighbours.

    The weighted degree sum(w_u for neighbours u) / w_v is recomputed on the
    remaining subgraph each round. Zero-weight vertices rank last; ties go to
    the lowest vertex index.
    """
    w = graph.weights
    alive = set(range(len(w)))
    chosen = []
    while alive:
        best, best_key = -1, math.inf
        for v in sorted(alive):
            if w[v] > 0:
                key = sum(w[u] for u in graph.adjacency[v] if u in alive) / w[v]
            else:
                key = math.inf
            if best < 0 or key < best_key:
                best, best_key = v, key
        chosen.append(best)
        alive.discard(best)
        alive -= graph.adjacency[best]
    gamma = weighted_average_degree(graph)
    chosen.sort()
    return MwisResult(tuple(chosen), float(sum(w[v] for v in chosen)), gamma, 1.0 / (gamma + 1.0))


def solve_mwis(problem: AssignmentProblem) -> Assignment:
    graph = build_conflict_graph(problem)
    result = solve_mwis_greedy(graph)
    return problem.assignment(graph.vertices[v] for v in result.independent_set if graph.weights[v] > 0)
