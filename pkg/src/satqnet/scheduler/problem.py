"""Per-slot assignment instance, solutions, and the shared feasibility check."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ProblemError(ValueError):
    """Malformed assignment instance."""


class PreconditionError(ValueError):
    """A special-case solver was called outside its capacity regime."""


def build_indicator(fidelity: float, threshold: float, elevation1: float, elevation2: float, elevation_limit: float) -> int:
    """1 when the link clears the fidelity threshold and both elevation limits (inclusive)."""
    return int(fidelity >= threshold and elevation1 >= elevation_limit and elevation2 >= elevation_limit)


def _caps(value, size: int, name: str) -> np.ndarray:
    arr = np.full(size, value, dtype=np.int64) if np.isscalar(value) else np.asarray(value, dtype=np.int64)
    if arr.shape != (size,):
        raise ProblemError(f"{name} needs {size} entries, got shape {arr.shape}")
    if (arr < 0).any():
        raise ProblemError(f"{name} must be non-negative")
    return arr


@dataclass
class AssignmentProblem:
    """OPT-SAT instance for one slot.

    ``pair_stations[j]`` holds the two station indices of pair ``j``;
    station indices run over ``range(num_stations)``.
    """

    weights: np.ndarray
    indicators: np.ndarray
    pair_stations: list[tuple[int, int]]
    receiver_caps: np.ndarray
    transmitter_caps: np.ndarray
    pair_caps: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 2:
            raise ProblemError("weights must be an N x M matrix")
        n, m = self.weights.shape
        self.indicators = np.asarray(self.indicators).astype(bool)
        if self.indicators.shape != (n, m):
            raise ProblemError("indicators must match the weight matrix shape")
        if not np.isfinite(self.weights).all() or (self.weights < 0).any():
            raise ProblemError("weights must be finite and non-negative")
        self.pair_stations = [tuple(int(g) for g in p) for p in self.pair_stations]
        if len(self.pair_stations) != m:
            raise ProblemError(f"need station membership for all {m} pairs")
        for j, (a, b) in enumerate(self.pair_stations):
            if a == b:
                raise ProblemError(f"pair {j} joins station {a} to itself")
        num_g = 1 + max((max(p) for p in self.pair_stations), default=-1)
        self.receiver_caps = _caps(self.receiver_caps, max(num_g, len(np.atleast_1d(self.receiver_caps))), "receiver_caps")
        self.transmitter_caps = _caps(self.transmitter_caps, n, "transmitter_caps")
        self.pair_caps = _caps(self.pair_caps, m, "pair_caps")
        for j, (a, b) in enumerate(self.pair_stations):
            for g in (a, b):
                if self.receiver_caps[g] < self.pair_caps[j]:
                    raise ProblemError(f"receiver cap of station {g} is below the cap of pair {j} (R_g >= L_j required)")

    @classmethod
    def build(cls, weights, indicators=None, pair_stations=None, r_g=None, t_i=1, l_j=1) -> "AssignmentProblem":
        """Convenience constructor; scalar caps are broadcast.

        Without ``pair_stations`` every pair gets its own two stations.
        ``r_g=None`` means one receiver per satellite (non-binding).
        """
        w = np.asarray(weights, dtype=float)
        if w.size == 0 and w.ndim < 2:
            w = w.reshape(0, 0)
        n, m = w.shape
        if indicators is None:
            indicators = np.ones((n, m), dtype=bool)
        if pair_stations is None:
            pair_stations = [(2 * j, 2 * j + 1) for j in range(m)]
        num_g = 1 + max((max(p) for p in pair_stations), default=-1)
        if r_g is None:
            r_g = max(n, 1)
        r = np.full(num_g, r_g, dtype=np.int64) if np.isscalar(r_g) else r_g
        return cls(w, indicators, pair_stations, r, t_i, l_j)

    @property
    def num_satellites(self) -> int:
        return self.weights.shape[0]

    @property
    def num_pairs(self) -> int:
        return self.weights.shape[1]

    @property
    def num_stations(self) -> int:
        return len(self.receiver_caps)

    def effective_weights(self) -> np.ndarray:
        return np.where(self.indicators, self.weights, 0.0)

    def candidates(self) -> list[tuple[int, int, float]]:
        """Links that can add objective: C_ij = 1 and positive weight, heaviest first."""
        eff = self.effective_weights()
        ii, jj = np.nonzero(eff > 0)
        cands = [(int(i), int(j), float(eff[i, j])) for i, j in zip(ii, jj)]
        cands.sort(key=lambda c: (-c[2], c[0], c[1]))
        return cands

    def receivers_nonbinding(self) -> bool:
        """True when no station cap can bind given the transmitter and pair caps."""
        deg = np.zeros(self.num_stations, dtype=np.int64)
        demand = np.zeros(self.num_stations, dtype=np.int64)
        for j, (a, b) in enumerate(self.pair_stations):
            for g in (a, b):
                deg[g] += 1
                demand[g] += self.pair_caps[j]
        supply = np.array([np.minimum(self.transmitter_caps, d).sum() for d in deg], dtype=np.int64)
        return bool((self.receiver_caps >= np.minimum(demand, supply)).all())

    def objective(self, links) -> float:
        eff = self.effective_weights()
        return float(sum(eff[i, j] for i, j in links))

    def assignment(self, links) -> "Assignment":
        links = tuple(sorted((int(i), int(j)) for i, j in links))
        return Assignment(links, self.objective(links))

    def scaled(self, factor: float) -> "AssignmentProblem":
        return AssignmentProblem(self.weights * factor, self.indicators, self.pair_stations,
                                 self.receiver_caps, self.transmitter_caps, self.pair_caps)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "indicators": self.indicators.astype(int).tolist(),
            "pairs": [list(p) for p in self.pair_stations],
            "r_g": self.receiver_caps.tolist(),
            "t_i": self.transmitter_caps.tolist(),
            "l_j": self.pair_caps.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssignmentProblem":
        weights = data.get("weights", [])
        n = len(weights)
        m = len(weights[0]) if n else len(data.get("pairs", []))
        w = np.asarray(weights, dtype=float).reshape(n, m)
        ind = data.get("indicators")
        ind = np.ones((n, m), dtype=bool) if ind is None else np.asarray(ind, dtype=bool).reshape(n, m)
        pairs = data.get("pairs") or [(2 * j, 2 * j + 1) for j in range(m)]
        num_g = 1 + max((max(p) for p in pairs), default=-1)
        r_g = data.get("r_g")
        if r_g is None:
            r_g = max(n, 1)
        r = np.full(num_g, r_g, dtype=np.int64) if np.isscalar(r_g) else r_g
        return cls(w, ind, pairs, r, data.get("t_i", 1), data.get("l_j", 1))


@dataclass(frozen=True)
class Assignment:
    links: tuple[tuple[int, int], ...]
    objective: float

    def as_matrix(self, shape) -> np.ndarray:
        x = np.zeros(shape, dtype=np.int64)
        for i, j in self.links:
            x[i, j] = 1
        return x


def feasibility_violations(problem: AssignmentProblem, links) -> list[str]:
    """Every violated OPT-SAT constraint, as human-readable strings."""
    problems = []
    links = list(links)
    if len(set(links)) != len(links):
        problems.append("a link is selected more than once (x must be binary)")
    n, m = problem.weights.shape
    sat_load = np.zeros(n, dtype=np.int64)
    pair_load = np.zeros(m, dtype=np.int64)
    station_load = np.zeros(problem.num_stations, dtype=np.int64)
    for i, j in links:
        if not (0 <= i < n and 0 <= j < m):
            problems.append(f"link ({i}, {j}) is out of range")
            continue
        sat_load[i] += 1
        pair_load[j] += 1
        for g in problem.pair_stations[j]:
            station_load[g] += 1
    for g in np.nonzero(station_load > problem.receiver_caps)[0]:
        problems.append(f"station {g}: {station_load[g]} links exceed receiver cap {problem.receiver_caps[g]}")
    for i in np.nonzero(sat_load > problem.transmitter_caps)[0]:
        problems.append(f"satellite {i}: {sat_load[i]} links exceed transmitter cap {problem.transmitter_caps[i]}")
    for j in np.nonzero(pair_load > problem.pair_caps)[0]:
        problems.append(f"pair {j}: {pair_load[j]} links exceed pair cap {problem.pair_caps[j]}")
    return problems


def is_feasible(problem: AssignmentProblem, links) -> bool:
    return not feasibility_violations(problem, links)
