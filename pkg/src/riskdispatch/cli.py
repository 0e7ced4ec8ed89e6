"""Config ingestion and the solve / simulate / audit / sweep commands.

Configs are YAML documents with a versioned ``schema: 1`` field and a fixed
key set; unknown keys are rejected by name. All power and energy quantities
are unitless normalized values. Figure-style outputs are emitted as CSV, not
rendered images.

Exit codes: 0 success, 1 validation/config error, 2 solver error, 3 I/O.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import dp, oracle, risk, sim
from .dp import SolverGrid, StorageParams, ValueTable
from .errors import (ConfigError, FeasibilityError, InputError, RiskDispatchError,
                     SizeError, SolverError, ValidationError)
from .netload import Empirical, Gaussian, ScenarioConfig
from .risk import RiskSpec

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema", "horizon", "p_min", "p_max", "s_min", "s_max", "leakage_a",
    "delta_t", "eta_in", "eta_out", "alpha", "ru_tolerance",
    "quadrature_points", "state_points", "action_tolerance",
    "action_bracket_points", "stages", "realization",
}
_REQUIRED_KEYS = {
    "schema", "horizon", "p_min", "p_max", "s_min", "s_max", "alpha",
    "delta_t", "stages",
}
_STAGE_KEYS = {"mean", "stddev", "samples"}


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    storage: StorageParams
    risk: RiskSpec
    solver: SolverGrid
    realization: object = "means"  # "means" | inline tuple | file path str


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(f"missing required config key '{key}'")
    return doc[key]


def _parse_stage(entry, index: int):
    if not isinstance(entry, dict):
        raise ConfigError(f"stages[{index}] must be a mapping")
    unknown = set(entry) - _STAGE_KEYS
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}' in stages[{index}]")
    if "samples" in entry:
        if "mean" in entry or "stddev" in entry:
            raise ConfigError(
                f"stages[{index}] mixes 'samples' with Gaussian keys"
            )
        return Empirical(entry["samples"])
    if "mean" not in entry or "stddev" not in entry:
        raise ConfigError(
            f"stages[{index}] needs either 'samples' or 'mean' and 'stddev'"
        )
    return Gaussian(mean=float(entry["mean"]), stddev=float(entry["stddev"]))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML config document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key '{sorted(unknown)[0]}'")
    for key in sorted(_REQUIRED_KEYS):
        _require(doc, key)
    if int(doc["schema"]) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {doc['schema']}")
    horizon = int(doc["horizon"])
    stages_doc = doc["stages"]
    if stages_doc is None:
        stages_doc = []
    if not isinstance(stages_doc, list):
        raise ConfigError("'stages' must be a list")
    stages = tuple(_parse_stage(e, i) for i, e in enumerate(stages_doc))
    try:
        scenario = ScenarioConfig(horizon=horizon, distributions=stages,
                                  p_min=float(doc["p_min"]),
                                  p_max=float(doc["p_max"]))
        storage = StorageParams(s_min=float(doc["s_min"]),
                                s_max=float(doc["s_max"]),
                                leakage_a=float(doc.get("leakage_a", 0.99)),
                                delta_t=float(doc["delta_t"]),
                                eta_in=float(doc.get("eta_in", 1.0)),
                                eta_out=float(doc.get("eta_out", 1.0)))
        risk_spec = RiskSpec(alpha=float(doc["alpha"]),
                             ru_tolerance=float(doc.get("ru_tolerance", 1e-10)),
                             quadrature_points=int(doc.get("quadrature_points", 256)))
        solver = SolverGrid(state_points=int(doc.get("state_points", 201)),
                            action_tolerance=float(doc.get("action_tolerance", 1e-6)),
                            action_bracket_points=int(doc.get("action_bracket_points", 33)))
    except ValidationError:
        raise
    realization = doc.get("realization", "means")
    if isinstance(realization, list):
        if len(realization) != horizon:
            raise ConfigError(
                f"inline realization has {len(realization)} entries, expected {horizon}"
            )
        realization = tuple(float(x) for x in realization)
    elif not isinstance(realization, str):
        raise ConfigError("'realization' must be 'means', a file path, or a list")
    return RunConfig(scenario=scenario, storage=storage, risk=risk_spec,
                     solver=solver, realization=realization)


def parse_config_file(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def emit_config(config: RunConfig) -> str:
    """Serialize a RunConfig back to the YAML schema (round-trip safe)."""
    stages = []
    for d in config.scenario.distributions:
        if isinstance(d, Gaussian):
            stages.append({"mean": d.mean, "stddev": d.stddev})
        else:
            stages.append({"samples": list(d.samples)})
    doc = {
        "schema": SCHEMA_VERSION,
        "horizon": config.scenario.horizon,
        "p_min": config.scenario.p_min,
        "p_max": config.scenario.p_max,
        "s_min": config.storage.s_min,
        "s_max": config.storage.s_max,
        "leakage_a": config.storage.leakage_a,
        "delta_t": config.storage.delta_t,
        "eta_in": config.storage.eta_in,
        "eta_out": config.storage.eta_out,
        "alpha": config.risk.alpha,
        "ru_tolerance": config.risk.ru_tolerance,
        "quadrature_points": config.risk.quadrature_points,
        "state_points": config.solver.state_points,
        "action_tolerance": config.solver.action_tolerance,
        "action_bracket_points": config.solver.action_bracket_points,
        "stages": stages,
        "realization": (list(config.realization)
                        if isinstance(config.realization, tuple)
                        else config.realization),
    }
    return yaml.safe_dump(doc, sort_keys=False)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_values_csv(path, table: ValueTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "s", "J", "b_opt"])
        if table.horizon == 0:
            for s, j in zip(table.states, table.values[0]):
                writer.writerow([1, _fmt(s), _fmt(j), ""])
            return
        for t in range(table.horizon):
            for s, j, b in zip(table.states, table.values[t], table.actions[t]):
                writer.writerow([t + 1, _fmt(s), _fmt(j), _fmt(b)])


def read_values_csv(path) -> ValueTable:
    rows_by_t: dict[int, list[tuple[float, float, float | None]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["t", "s", "J", "b_opt"]:
            raise ValidationError(f"values file {path} has unexpected columns")
        for row in reader:
            t = int(row["t"])
            b = float(row["b_opt"]) if row["b_opt"] != "" else None
            rows_by_t.setdefault(t, []).append((float(row["s"]), float(row["J"]), b))
    if not rows_by_t:
        raise ValidationError(f"values file {path} is empty")
    stages = sorted(rows_by_t)
    if stages != list(range(1, len(stages) + 1)):
        raise ValidationError(f"values file {path} has non-contiguous stages")
    states = np.array([r[0] for r in rows_by_t[1]])
    values, actions = [], []
    horizon0 = all(r[2] is None for r in rows_by_t[1])
    for t in stages:
        rows = rows_by_t[t]
        if len(rows) != len(states):
            raise ValidationError(f"values file {path}: stage {t} row count differs")
        values.append(np.array([r[1] for r in rows]))
        if not horizon0:
            actions.append(np.array([r[2] for r in rows]))
    values.append(np.zeros(len(states)))
    return ValueTable(states=states, values=values, actions=actions)


def read_realization_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "n" not in reader.fieldnames:
            raise ValidationError(f"realization file {path} needs an 'n' column")
        vals = [float(row["n"]) for row in reader]
    return np.asarray(vals, dtype=float)


def _resolve_realization(config: RunConfig, override: str | None) -> np.ndarray:
    source = override if override is not None else config.realization
    T = config.scenario.horizon
    if isinstance(source, tuple):
        real = np.asarray(source, dtype=float)
    elif source == "means":
        real = config.scenario.stage_means()
    else:
        real = read_realization_csv(source)
    if len(real) != T:
        raise ValidationError(
            f"realization has {len(real)} entries, expected horizon {T}"
        )
    return real


def cmd_solve(config: RunConfig, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        table = dp.solve(config.scenario, config.storage, config.solver, config.risk)
    except RiskDispatchError:
        raise
    except Exception as exc:  # numerical blowups surface as solver failures
        raise SolverError(f"backward solve failed: {exc}") from exc
    runtime = time.perf_counter() - start
    s1, j1 = dp.optimal_initial_state(table)
    write_values_csv(out / "values.csv", table)
    summary = {
        "s1_star": s1,
        "j1_star": j1,
        "runtime_seconds": runtime,
        "horizon": config.scenario.horizon,
        "state_points": config.solver.state_points,
        "action_tolerance": config.solver.action_tolerance,
        "alpha": config.risk.alpha,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_simulate(config: RunConfig, values_path, out_dir,
                 realization_override: str | None = None) -> dict:
    table = read_values_csv(values_path)
    if table.horizon != config.scenario.horizon:
        raise ValidationError(
            f"values artifact covers {table.horizon} stages, config horizon is "
            f"{config.scenario.horizon}"
        )
    expected_states = dp.state_grid(config.storage, config.solver.state_points)
    if len(table.states) != len(expected_states) or not np.allclose(
            table.states, expected_states, atol=1e-9, rtol=0.0):
        raise ValidationError("values artifact state grid does not match the config")
    real = _resolve_realization(config, realization_override)
    s_start, _ = dp.optimal_initial_state(table)
    trace = sim.rollout(table, real, s_start, config.scenario, config.storage)
    shed, curt = sim.shed_curtail_split(trace)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "s", "b", "n", "n_tilde", "p", "shed", "curtail",
                         "n_tilde_baseline"])
        for t in range(config.scenario.horizon):
            writer.writerow([t + 1, _fmt(trace.s[t]), _fmt(trace.b[t]),
                             _fmt(trace.n[t]), _fmt(trace.n_tilde[t]),
                             _fmt(trace.p[t]), _fmt(shed[t]), _fmt(curt[t]),
                             _fmt(trace.n_tilde_baseline[t])])
    with open(out / "comparison.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "n_tilde_with", "n_tilde_without"])
        for t in range(config.scenario.horizon):
            writer.writerow([t + 1, _fmt(trace.n_tilde[t]),
                             _fmt(trace.n_tilde_baseline[t])])
    return {
        "total_intervention_with": float(np.abs(trace.n_tilde).sum()),
        "total_intervention_without": float(np.abs(trace.n_tilde_baseline).sum()),
        "s_start": s_start,
    }


def cmd_audit(config: RunConfig, out_dir, seed: int = 0,
              samples: int = 1_000_000, values_path=None) -> dict:
    checks = []
    scenario, storage, spec = config.scenario, config.storage, config.risk
    limits = (scenario.p_min, scenario.p_max)
    grid = dp.global_action_grid(storage, 5)
    T = scenario.horizon
    stage_picks = sorted({0, T // 2, T - 1}) if T > 0 else []
    idx = 0
    for t in stage_picks:
        for b in grid[1:-1]:
            cfg = oracle.OracleConfig(sample_count=samples, rng_seed=seed + idx)
            idx += 1
            analytic = risk.stage_cost(scenario.distributions[t], float(b),
                                       limits, spec)
            est = oracle.mc_cvar(scenario.distributions[t], float(b), limits,
                                 spec.alpha, cfg)
            tol = max(4.0 * est.std_error, 1e-9)
            ok = abs(analytic - est.estimate) <= tol
            checks.append({
                "name": f"mc_cvar[t={t + 1},b={float(b):.4g}]",
                "status": "pass" if ok else "fail",
                "detail": {"analytic": analytic, "estimate": est.estimate,
                           "std_error": est.std_error,
                           "empty_tail": est.empty_tail},
            })
    try:
        ex = oracle.exhaustive_dp(scenario, storage, spec,
                                  action_grid_points=9, state_points=5)
        restricted = dp.solve(scenario, storage,
                              SolverGrid(state_points=5), spec,
                              action_grid=dp.global_action_grid(storage, 9))
        same = all(np.array_equal(a, b)
                   for a, b in zip(ex.values, restricted.values))
        checks.append({
            "name": "exhaustive_dp",
            "status": "pass" if same else "fail",
            "detail": {"optimal_cost": ex.optimal_cost},
        })
    except SizeError as exc:
        checks.append({"name": "exhaustive_dp", "status": "skip",
                       "detail": {"reason": str(exc)}})
    if values_path is not None:
        table = read_values_csv(values_path)
        fresh = dp.solve(scenario, storage, config.solver, spec)
        ok = (table.horizon == fresh.horizon
              and len(table.states) == len(fresh.states)
              and all(np.allclose(a, b, atol=1e-9, rtol=0.0)
                      for a, b in zip(table.values[:-1], fresh.values[:-1])))
        checks.append({
            "name": "values_artifact",
            "status": "pass" if ok else "fail",
            "detail": {"path": str(values_path)},
        })
    report = {
        "passed": all(c["status"] != "fail" for c in checks),
        "checks": checks,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "audit.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


_SWEEPABLE = {
    "alpha": ("risk", float), "ru_tolerance": ("risk", float),
    "s_min": ("storage", float), "s_max": ("storage", float),
    "leakage_a": ("storage", float), "delta_t": ("storage", float),
    "eta_in": ("storage", float), "eta_out": ("storage", float),
    "p_min": ("scenario", float), "p_max": ("scenario", float),
    "state_points": ("solver", int), "action_tolerance": ("solver", float),
}


def _with_param(config: RunConfig, name: str, value) -> RunConfig:
    if name not in _SWEEPABLE:
        raise ValidationError(f"parameter '{name}' is not sweepable")
    section, caster = _SWEEPABLE[name]
    value = caster(value)
    if section == "scenario":
        scenario = ScenarioConfig(
            horizon=config.scenario.horizon,
            distributions=config.scenario.distributions,
            p_min=value if name == "p_min" else config.scenario.p_min,
            p_max=value if name == "p_max" else config.scenario.p_max)
        return dataclasses.replace(config, scenario=scenario)
    target = getattr(config, "risk" if section == "risk" else section)
    return dataclasses.replace(config,
                               **{section: dataclasses.replace(target, **{name: value})})


def cmd_sweep(config: RunConfig, param: str, values: list, out_dir) -> list[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for v in values:
        cfg = _with_param(config, param, v)
        start = time.perf_counter()
        table = dp.solve(cfg.scenario, cfg.storage, cfg.solver, cfg.risk)
        runtime = time.perf_counter() - start
        s1, j1 = dp.optimal_initial_state(table)
        rows.append({"param": param, "value": float(v), "s1_star": s1,
                     "j1_star": j1, "runtime_seconds": runtime})
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param", "value", "s1_star", "j1_star", "runtime_seconds"])
        for r in rows:
            writer.writerow([r["param"], _fmt(r["value"]), _fmt(r["s1_star"]),
                             _fmt(r["j1_star"]), _fmt(r["runtime_seconds"])])
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskdispatch",
        description="Risk-optimal battery dispatch for a transmission-limited microgrid",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the backward solver")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", required=True)

    p_sim = sub.add_parser("simulate", help="roll out a realization under a solved policy")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--values", required=True)
    p_sim.add_argument("--realization", default=None,
                       help="'means' or a CSV path (overrides the config)")
    p_sim.add_argument("--out", required=True)

    p_audit = sub.add_parser("audit", help="run the verification oracles")
    p_audit.add_argument("--config", required=True)
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.add_argument("--samples", type=int, default=1_000_000)
    p_audit.add_argument("--values", default=None)
    p_audit.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="re-solve across a parameter list")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list of values")
    p_sweep.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config_file(args.config)
        if args.command == "solve":
            summary = cmd_solve(config, args.out)
            print(json.dumps(summary))
        elif args.command == "simulate":
            result = cmd_simulate(config, args.values, args.out,
                                  realization_override=args.realization)
            print(json.dumps(result))
        elif args.command == "audit":
            report = cmd_audit(config, args.out, seed=args.seed,
                               samples=args.samples, values_path=args.values)
            print(json.dumps({"passed": report["passed"],
                              "checks": len(report["checks"])}))
        elif args.command == "sweep":
            values = [v for v in args.values.split(",") if v != ""]
            rows = cmd_sweep(config, args.param, values, args.out)
            print(json.dumps({"rows": len(rows)}))
        return 0
    except (ConfigError, ValidationError, InputError, FeasibilityError,
            SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    raise SystemExit(main())
