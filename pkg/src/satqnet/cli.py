"""Command-line entry point: ``satqnet run | sweep | solve | preset``.

Exit codes: 0 success, 2 configuration/validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import PRESETS, ConfigError, config_hash, preset, scenario_from_dict
from .scheduler import AssignmentProblem, PreconditionError, ProblemError, feasibility_violations
from .scheduler.exact import solve_exact
from .scheduler.greedy import solve_greedy_baseline
from .scheduler.matching import solve_hungarian, solve_hungarian_expanded
from .scheduler.mwis import solve_mwis
from .scheduler.oracle import MAX_ORACLE_CELLS, OracleTooLarge, enumerate_optimum
from .simulation import SimulationReport, altitude_sweep, compare_policies

log = logging.getLogger("satqnet")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

SLOT_COLUMNS = ["t", "policy", "sat_id", "pair_id", "psi_hz", "chi", "count"]
PAIR_COLUMNS = ["pair_id", "first", "second", "policy", "total"]
SWEEP_COLUMNS = ["altitude_m", "policy", "grand_total", "gap_vs_exact"]

SOLVERS = {
    "exact": solve_exact,
    "hungarian": solve_hungarian,
    "hungarian_expanded": solve_hungarian_expanded,
    "mwis": solve_mwis,
    "greedy": solve_greedy_baseline,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def load_config(source: str) -> dict:
    """Read a JSON config; ``preset:<name>`` selects a built-in preset."""
    if source.startswith("preset:"):
        return preset(source.split(":", 1)[1])
    try:
        with open(source) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {source}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{source} is not valid JSON: {exc}") from None


def report_json(report: SimulationReport) -> str:
    return json.dumps(report.to_dict(), indent=1, allow_nan=False) + "\n"


def write_report_files(out: Path, scenario, report: SimulationReport) -> dict[str, str]:
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("report.json", "slots.csv", "pairs.csv")}
    paths["report.json"].write_text(report_json(report))
    with open(paths["slots.csv"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SLOT_COLUMNS)
        for slot in report.slots:
            for link in slot.links:
                w.writerow([slot.t, report.policy, link.sat_id, link.pair_id, repr(link.psi), repr(link.chi), repr(link.count)])
    with open(paths["pairs.csv"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PAIR_COLUMNS)
        for pair, total in zip(scenario.pairs, report.pair_totals):
            w.writerow([pair.id, pair.first, pair.second, report.policy, repr(total)])
    return {k: str(v) for k, v in paths.items()}


def write_manifest(out: Path, raw: dict, started: datetime, outputs: dict, wall: dict) -> Path:
    manifest = {
        "config_hash": config_hash(raw),
        "tool_version": __version__,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
        "wall_clock": wall,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def cmd_run(args) -> int:
    started = datetime.now(timezone.utc)
    raw = load_config(args.config)
    if args.policy:
        raw["policy"] = args.policy
    if args.slots:
        raw.setdefault("time", {})["num_slots"] = args.slots
    scenario = scenario_from_dict(raw)
    report = compare_policies(scenario, [scenario.policy], workers=args.workers)[scenario.policy]
    out = Path(args.out)
    outputs = write_report_files(out, scenario, report)
    outputs["manifest.json"] = str(out / "manifest.json")
    write_manifest(out, raw, started, outputs, report.wall_clock)
    print(f"{scenario.policy}: grand total {report.grand_total:.6g} ebits over {scenario.time.num_slots} slots -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = datetime.now(timezone.utc)
    raw = load_config(args.config)
    if args.slots:
        raw.setdefault("time", {})["num_slots"] = args.slots
    scenario = scenario_from_dict(raw)
    altitudes = [a * 1000.0 for a in args.altitudes_km]
    if any(a <= 0 for a in altitudes):
        raise CliError("altitudes must be positive")
    rows = altitude_sweep(scenario, altitudes, args.policies, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(r.altitude), r.policy, repr(r.grand_total), repr(r.gap_vs_exact)])
    write_manifest(out, raw, started, {"sweep.csv": str(path), "manifest.json": str(out / "manifest.json")}, {})
    for r in rows:
        print(f"{r.altitude / 1000:8.0f} km  {r.policy:16s} {r.grand_total:14.6g}  gap {100 * r.gap_vs_exact:6.2f}%")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        with open(args.instance) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read instance {args.instance}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.instance} is not valid JSON: {exc}") from None
    problem = AssignmentProblem.from_dict(data)
    if args.check and problem.weights.size > MAX_ORACLE_CELLS:
        raise CliError(f"--check refused: {problem.weights.size} cells exceed the exhaustive oracle limit of {MAX_ORACLE_CELLS}")
    assignment = SOLVERS[args.solver](problem)
    result = {
        "solver": args.solver,
        "links": [list(link) for link in assignment.links],
        "objective": assignment.objective,
        "feasible": not feasibility_violations(problem, assignment.links),
    }
    if args.check:
        best = enumerate_optimum(problem)
        gap = (best.objective - assignment.objective) / best.objective if best.objective > 0 else 0.0
        result["check"] = {"optimum": best.objective, "optimal_links": [list(l) for l in best.links], "gap": gap}
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_preset(args) -> int:
    print(json.dumps(preset(args.name), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satqnet", description="Satellite entanglement-distribution scheduling simulator.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="simulate one scenario and write report files")
    r.add_argument("config", help="JSON config path, or preset:desk / preset:full")
    r.add_argument("-o", "--out", default="out")
    r.add_argument("--policy", choices=["exact", "hungarian", "mwis_greedy", "greedy_baseline"])
    r.add_argument("--slots", type=int, help="override time.num_slots")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="grand totals over orbit altitudes")
    s.add_argument("config")
    s.add_argument("--altitudes-km", type=float, nargs="+", default=[500, 1000, 2000, 4000, 6000])
    s.add_argument("--policies", nargs="+", default=["exact", "greedy_baseline"],
                   choices=["exact", "hungarian", "mwis_greedy", "greedy_baseline"])
    s.add_argument("-o", "--out", default="out")
    s.add_argument("--slots", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("solve", help="solve one OPT-SAT instance from JSON")
    v.add_argument("instance")
    v.add_argument("--solver", choices=sorted(SOLVERS), default="exact")
    v.add_argument("--check", action="store_true", help=f"compare with exhaustive enumeration (N*M <= {MAX_ORACLE_CELLS})")
    v.set_defaults(func=cmd_solve)

    pr = sub.add_parser("preset", help="print a preset config as JSON")
    pr.add_argument("name", choices=PRESETS)
    pr.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, PreconditionError, ProblemError, OracleTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
