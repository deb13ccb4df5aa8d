"""Per-slot OPT-SAT instances and solvers."""
from .exact import solve_exact
from .greedy import solve_greedy_baseline
from .matching import expand_copies, hungarian, max_weight_matching, solve_hungarian, solve_hungarian_expanded
from .mwis import ConflictGraph, MwisResult, build_conflict_graph, solve_mwis, solve_mwis_greedy, weighted_average_degree
from .problem import (
    Assignment,
    AssignmentProblem,
    PreconditionError,
    ProblemError,
    build_indicator,
    feasibility_violations,
    is_feasible,
)

POLICIES = {
    "exact": solve_exact,
    "hungarian": solve_hungarian,
    "mwis_greedy": solve_mwis,
    "greedy_baseline": solve_greedy_baseline,
}


def check_policy_caps(policy: str, problem: AssignmentProblem) -> None:
    """Raise :class:`PreconditionError` if ``policy`` cannot run on these caps."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {sorted(POLICIES)}")
    if policy == "hungarian":
        if (problem.transmitter_caps != 1).any() or (problem.pair_caps != 1).any():
            raise PreconditionError("policy 'hungarian' needs t_i = 1 and l_j = 1")
        if not problem.receivers_nonbinding():
            raise PreconditionError("policy 'hungarian' needs non-binding receiver caps (r_g = N)")
    if policy == "mwis_greedy":
        if (problem.receiver_caps != 1).any() or (problem.transmitter_caps != 1).any() or (problem.pair_caps != 1).any():
            raise PreconditionError("policy 'mwis_greedy' needs r_g = t_i = l_j = 1")


def solve(problem: AssignmentProblem, policy: str) -> Assignment:
    check_policy_caps(policy, problem)
    return POLICIES[policy](problem)


__all__ = [
    "Assignment",
    "AssignmentProblem",
    "ConflictGraph",
    "MwisResult",
    "POLICIES",
    "PreconditionError",
    "ProblemError",
    "build_conflict_graph",
    "build_indicator",
    "check_policy_caps",
    "expand_copies",
    "feasibility_violations",
    "hungarian",
    "is_feasible",
    "max_weight_matching",
    "solve",
    "solve_exact",
    "solve_greedy_baseline",
    "solve_hungarian",
    "solve_hungarian_expanded",
    "solve_mwis",
    "solve_mwis_greedy",
    "weighted_average_degree",
]
