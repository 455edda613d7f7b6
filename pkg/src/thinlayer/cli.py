"""Command-line experiment runner.

Exit codes: 0 all checks passed, 1 a certification failed, 2 invalid
configuration, 3 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import oracle
from .asymptotics import (ExpansionProblem, certify_theorem_1_1, certify_theorem_1_2,
                          interface_identity_violations, measurement_circle, solve_corrector,
                          tensor_identities_check)
from .boundary_ops import jump_relation_violations
from .config import ConfigError, ExperimentConfig
from .kernels import LameParams
from .transmission import SolverError, solve_three_phase, solve_two_phase
from .geometry import PerturbedCurve

log = logging.getLogger("thinlayer")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
# violations below this fraction of the tolerance count as converged (probe roundoff level)
JUMP_FLOOR_FRACTION = 1e-2

COMMANDS = {
    "solve": "solve",
    "oracle-compare": "oracle_compare",
    "certify-thm11": "certify_thm11",
    "certify-thm12": "certify_thm12",
    "check-jumps": "check_jumps",
    "check-identities": "check_identities",
}


@dataclass
class TaskResult:
    passed: bool
    summary: dict = field(default_factory=dict)
    line: str = ""


def _fmt(value) -> str:
    return "%.17g" % value


def write_table(path: Path, columns, rows):
    """CSV with a header; floats printed with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


# --- tasks --------------------------------------------------------------------

def task_solve(cfg: ExperimentConfig, out: Path) -> TaskResult:
    curve = cfg.build_curve()
    profile = cfg.thickness_profile(curve)
    eps = cfg.solve_epsilon
    H = cfg.background()
    sol = solve_three_phase(cfg.material_triple(), curve, PerturbedCurve(curve, profile, eps), H)
    probes = cfg.probe_points(curve)
    u = sol.eval_field(probes)
    hv = H.value(probes)
    region = sol.region(probes)
    write_table(out / "solution.csv", ["x", "y", "region", "u_x", "u_y", "H_x", "H_y", "scattered_x", "scattered_y"],
                [(float(p[0]), float(p[1]), int(r), float(a[0]), float(a[1]), float(b[0]), float(b[1]),
                  float(a[0] - b[0]), float(a[1] - b[1])) for p, r, a, b in zip(probes, region, u, hv)])
    moments = {k: float(np.max(np.abs(v))) for k, v in sol.psi_moments().items()}
    failures = [f"{k} moments {v:.2e} exceed 1e-8" for k, v in moments.items() if v > 1e-8]
    scattered = float(np.max(np.abs(u - hv)))
    if cfg.material_triple().is_trivial and scattered > cfg.threshold("zero"):
        failures.append(f"zero-contrast field deviates from the background by {scattered:.2e}")
    summary = {"epsilon": eps, "condition": sol.condition, "residual": sol.residual,
               "psi_moments": moments, "max_scattered": scattered, "message": "; ".join(failures)}
    return TaskResult(not failures, summary,
                      f"eps={eps:g} condition={sol.condition:.3e} max|u-H|={scattered:.3e}")


def _require_radial(cfg: ExperimentConfig) -> float:
    amplitude = cfg.radial_amplitude()
    if amplitude is None:
        raise ConfigError("oracle_compare: needs a circle centred at the origin, constant thickness "
                          "and background_field matrix a*I with zero offset")
    return amplitude


def task_oracle_compare(cfg: ExperimentConfig, out: Path) -> TaskResult:
    amplitude = _require_radial(cfg)
    mats = cfg.material_triple()
    curve = cfg.build_curve()
    r1, mean = cfg.curve.get("radius", 1.0), cfg.thickness["mean"]
    eps = cfg.solve_epsilon
    probes = cfg.probe_points(curve)
    H = cfg.background()
    profile = cfg.thickness_profile(curve)

    coated = solve_three_phase(mats, curve, PerturbedCurve(curve, profile, eps), H)
    exact = oracle.radial_eval(oracle.solve_radial(mats, r1, r1 + eps * mean, amplitude), probes)
    zeroth = solve_two_phase(mats.background, mats.core, curve, H)
    bare = oracle.radial_eval(oracle.solve_radial_two_phase(mats.background, mats.core, r1, amplitude), probes)
    corrector = solve_corrector(zeroth, profile, mats.layer)
    first = oracle.corrector_oracle(mats, r1, probes, mean, amplitude)

    def rel(a, b):
        return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))

    checks = [
        ("three_phase_relative", rel(coated.eval_field(probes), exact), cfg.threshold("oracle")),
        ("two_phase_relative", rel(zeroth.eval_field(probes), bare), cfg.threshold("oracle")),
        ("corrector_absolute", float(np.max(np.abs(corrector.eval_field(probes) - first))),
         cfg.threshold("corrector_oracle")),
    ]
    rows = [(name, value, tol, value <= tol) for name, value, tol in checks]
    write_table(out / "oracle.csv", ["check", "value", "tolerance", "passed"], rows)
    passed = all(r[3] for r in rows)
    return TaskResult(passed, {name: value for name, value, _ in checks},
                      " ".join(f"{name}={value:.3e}" for name, value, _ in checks))


def _problem(cfg: ExperimentConfig) -> ExpansionProblem:
    curve = cfg.build_curve()
    return ExpansionProblem(cfg.material_triple(), curve, cfg.thickness_profile(curve), cfg.background(),
                            cfg.probe_points(curve), cfg.node_ladder)


def task_certify_thm11(cfg: ExperimentConfig, out: Path) -> TaskResult:
    report = certify_theorem_1_1(_problem(cfg), cfg.epsilon_ladder,
                                 (cfg.threshold("slope_e0"), cfg.threshold("slope_e1")))
    report.write_csv(out / "theorem11.csv")
    s = report.slopes
    return TaskResult(report.passed, report.summary(),
                      f"slope0={s.get('e0', float('nan')):.3f} slope1={s.get('e1', float('nan')):.3f}"
                      + (f" ({report.message})" if report.message else ""))


def task_certify_thm12(cfg: ExperimentConfig, out: Path) -> TaskResult:
    fields = cfg.measurement_fields()
    if not fields:
        raise ConfigError("measurement.fields: certify_thm12 needs at least one field F")
    problem = _problem(cfg)
    S = measurement_circle(problem.curve, cfg.measurement.get("n_nodes", 256),
                           cfg.measurement.get("radius_scale", 2.0))
    for i, F in enumerate(fields):
        if F.kind == "kelvin_point_source" and np.hypot(*F.source) <= S.radius:
            raise ConfigError(f"measurement.fields[{i}].source: must lie outside the measurement "
                              f"circle of radius {S.radius:g}")
    reports, parts = [], []
    for i, F in enumerate(fields):
        report = certify_theorem_1_2(problem, F, S, cfg.epsilon_ladder, cfg.threshold("slope_thm12"))
        report.write_csv(out / f"theorem12_{i}.csv")
        reports.append(report.summary())
        parts.append(f"F{i} slope={report.slopes.get('remainder', float('nan')):.3f}"
                     + ("" if report.passed else f" ({report.message})"))
    passed = all(r["passed"] for r in reports)
    return TaskResult(passed, {"fields": reports}, " ".join(parts))


def _jump_density(curve) -> np.ndarray:
    t = curve.param
    return np.column_stack([np.cos(t) + 0.3 * np.sin(2 * t), 0.5 + np.sin(3 * t)])


def task_check_jumps(cfg: ExperimentConfig, out: Path) -> TaskResult:
    material = LameParams(*cfg.materials["background"])
    levels = sorted(cfg.jump_check.get("n_nodes", [64, 128, 256]))
    delta = cfg.jump_check.get("relative_delta", 1e-3)
    history, rows = {}, []
    for n in levels:
        curve = cfg.build_curve(n)
        result = jump_relation_violations(material, curve, _jump_density(curve), delta)
        for (name, side), value in result.items():
            label = "exterior" if side > 0 else "interior"
            history.setdefault((name, label), []).append(value)
            rows.append((n, name, label, value))
    write_table(out / "jumps.csv", ["n_nodes", "relation", "side", "violation"], rows)
    tol = cfg.threshold("jumps")
    finest = max(v[-1] for v in history.values())
    failures = []
    if finest > tol:
        failures.append(f"finest-level violation {finest:.3e} exceeds {tol:g}")
    for key, values in history.items():
        v = np.maximum(values, JUMP_FLOOR_FRACTION * tol)
        if np.any(np.diff(v) > 0):
            failures.append(f"{key[0]} ({key[1]}) does not improve under refinement: {values}")
    return TaskResult(not failures, {"max_violation": finest, "n_nodes": levels, "message": "; ".join(failures)},
                      f"max violation {finest:.3e} at N={levels[-1]}")


def task_check_identities(cfg: ExperimentConfig, out: Path) -> TaskResult:
    mats = cfg.material_triple()
    curve = cfg.build_curve()
    zeroth = solve_two_phase(mats.background, mats.core, curve, cfg.background())
    rows = [(name, value, cfg.threshold("identities"), "solver")
            for name, value in tensor_identities_check(zeroth).items()]
    amplitude = cfg.radial_amplitude()
    if amplitude is not None:
        radial = oracle.solve_radial_two_phase(mats.background, mats.core, curve.radius, amplitude)
        exact = interface_identity_violations(
            mats.background, mats.core, curve,
            oracle.radial_region_gradient(radial, curve.nodes, "exterior"),
            oracle.radial_region_gradient(radial, curve.nodes, "core"))
        rows += [(name, value, cfg.threshold("identities_oracle"), "oracle") for name, value in exact.items()]
    table = [(name, value, tol, value <= tol, source) for name, value, tol, source in rows]
    write_table(out / "identities.csv", ["identity", "violation", "tolerance", "passed", "source"], table)
    worst = max(r[1] for r in table)
    return TaskResult(all(r[3] for r in table), {f"{r[4]}_{r[0]}": r[1] for r in table},
                      f"max violation {worst:.3e}")


TASK_RUNNERS: dict[str, Callable[[ExperimentConfig, Path], TaskResult]] = {
    "solve": task_solve,
    "oracle_compare": task_oracle_compare,
    "certify_thm11": task_certify_thm11,
    "certify_thm12": task_certify_thm12,
    "check_jumps": task_check_jumps,
    "check_identities": task_check_identities,
}


# --- driver -------------------------------------------------------------------

def run_tasks(cfg: ExperimentConfig, tasks, out_dir: Path, quiet: bool = False) -> int:
    """Run ``tasks`` in order, write ``summary.json`` and return the exit code."""
    out_dir.mkdir(parents=True, exist_ok=True)
    results, code = {}, EXIT_OK
    for task in tasks:
        start = time.perf_counter()
        try:
            result = TASK_RUNNERS[task](cfg, out_dir)
        except ConfigError as exc:
            _report(f"{task}: configuration error: {exc}", quiet, error=True)
            return EXIT_CONFIG
        except SolverError as exc:
            results[task] = {"passed": False, "error": str(exc)}
            _report(f"{task}: solver failure: {exc}", quiet, error=True)
            code = EXIT_SOLVER
            continue
        except (np.linalg.LinAlgError, FloatingPointError) as exc:
            results[task] = {"passed": False, "error": str(exc)}
            _report(f"{task}: solver failure: {exc}", quiet, error=True)
            code = EXIT_SOLVER
            continue
        except ValueError as exc:
            # geometry and material preconditions that only fail at run time (e.g. a ladder value
            # that makes the coated curve self-intersect)
            _report(f"{task}: invalid setup: {exc}", quiet, error=True)
            return EXIT_CONFIG
        log.info("%s finished in %.1f s", task, time.perf_counter() - start)
        results[task] = {"passed": result.passed, **result.summary}
        _report(f"{task}: {'PASS' if result.passed else 'FAIL'} {result.line}", quiet)
        if not result.passed and code == EXIT_OK:
            code = EXIT_FAILED
    summary = {"name": cfg.name, "passed": code == EXIT_OK, "exit_code": code, "tasks": results}
    text = json.dumps(_finite(summary), indent=2, sort_keys=True, allow_nan=False)
    (out_dir / "summary.json").write_text(text + "\n")
    return code


def _finite(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats (e.g. skipped slope fits) as null."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.generic,)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _report(message: str, quiet: bool, error: bool = False):
    if error:
        print(message, file=sys.stderr)
    elif not quiet:
        print(message)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thinlayer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment JSON file")
    common.add_argument("--out-dir", help="output directory (overrides output_dir)")
    common.add_argument("--n-nodes", type=int, help="base node count (overrides n_nodes)")
    common.add_argument("--quiet", action="store_true", help="only print errors")
    sub.add_parser("run", parents=[common], help="run every task listed in the config")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {COMMANDS[name]} task")
    return parser


def load_config(path, n_nodes=None) -> ExperimentConfig:
    cfg = ExperimentConfig.load(path)
    if n_nodes is not None:
        data = cfg.to_dict()
        data["n_nodes"] = n_nodes
        cfg = ExperimentConfig.from_dict(data)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.n_nodes)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    tasks = cfg.tasks if args.command == "run" else [COMMANDS[args.command]]
    out_dir = Path(args.out_dir or cfg.output_dir)
    return run_tasks(cfg, tasks, out_dir, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
