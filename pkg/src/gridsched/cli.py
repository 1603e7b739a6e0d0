"""Command-line driver: load -> formulate -> solve -> verify -> report.

Subcommands:

* ``run``    one model end-to-end, writing report.json / report.csv
* ``sweep``  penetration sweep over scale factors x model kinds x penalty
* ``verify`` exact MILP vs exhaustive-enumeration cross-check

Exit codes: 0 ok, 1 verification mismatch, 2 input error, 3 caps or
limits exceeded, 4 solver reports infeasible.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys as _sys
from pathlib import Path

from . import metrics, oracle
from .formulation import FormulationConfig, ModelKind, assemble
from .scenarios import ScenarioSet, load_scenario_set
from .solver import SolveOptions, SolveStatus, SolverError, solve
from .system import (CaseFormatError, PowerSystem, align_scenarios,
                     load_system, scale_penetration, validate_system)
from .topology import build_contingency_set, load_contingency_whitelist

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_CAPS = 3
EXIT_INFEASIBLE = 4


class InputError(Exception):
    pass


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("case", help="case JSON document")
    p.add_argument("scenarios", help="scenario JSON file")
    p.add_argument("--model", default="sscuc", choices=["sscuc", "sscuc-cnr"],
                   help="model kind (default sscuc)")
    p.add_argument("--penalty", default=None, metavar="VALUE|off",
                   help="override curtailment penalty in $/MWh, or 'off'")
    p.add_argument("--mip-gap", type=float, default=0.01,
                   help="relative MIP gap (default 0.01)")
    p.add_argument("--switch-limit", type=int, default=1,
                   help="max switching actions per contingency (default 1)")
    p.add_argument("--block-len", type=int, default=3,
                   help="availability blocking length in periods (default 3)")
    p.add_argument("--contingencies", default=None, metavar="FILE",
                   help="JSON array of line ids restricting the N-1 set")
    p.add_argument("--angle-bound", type=float, default=0.6,
                   help="bus angle box in radians (default 0.6)")
    p.add_argument("--ref-bus", default=None, help="reference bus id")
    p.add_argument("--strict-islanding", action="store_true",
                   help="drop switch candidates that would island the network")
    p.add_argument("--time-limit", type=float, default=None,
                   help="solver time limit in seconds")
    p.add_argument("--seed", type=int, default=0,
                   help="deterministic seed passed to the solver")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--penalty-table", action="store_true",
                   help="also solve with the penalty disabled and write a "
                        "side-by-side report_table.csv")


def _coerce_id(sys_obj: PowerSystem, raw: str | None):
    if raw is None:
        return None
    for b in sys_obj.buses:
        if str(b.id) == raw:
            return b.id
    raise InputError(f"reference bus {raw!r} not in case")


def _load_inputs(args) -> tuple[PowerSystem, ScenarioSet]:
    try:
        system = load_system(args.case)
    except (OSError, CaseFormatError) as exc:
        raise InputError(f"case: {exc}") from exc
    report = validate_system(system)
    if not report.ok:
        lines = "\n".join(f"  {v}" for v in report.violations)
        raise InputError(f"case fails validation:\n{lines}")
    try:
        scen = load_scenario_set(args.scenarios, block_len=args.block_len)
    except (OSError, ValueError) as exc:
        raise InputError(f"scenarios: {exc}") from exc
    scen = align_scenarios(system, scen)
    if scen.horizon != system.horizon:
        raise InputError(
            f"scenario horizon {scen.horizon} != demand horizon {system.horizon}")
    return system, scen


def _apply_penalty(system: PowerSystem, penalty: str | None
                   ) -> tuple[PowerSystem, bool]:
    """Returns the (possibly penalty-overridden) system and enabled flag."""
    if penalty is None:
        return system, True
    if penalty.lower() == "off":
        return system, False
    try:
        value = float(penalty)
    except ValueError:
        raise InputError(f"--penalty must be a number or 'off', got {penalty!r}")
    if value < 0:
        raise InputError("--penalty must be >= 0")
    from dataclasses import replace
    res_units = tuple(replace(w, curtail_penalty=value) for w in system.res_units)
    return replace(system, res_units=res_units), True


def _build_config(args, system: PowerSystem, penalty_enabled: bool
                  ) -> FormulationConfig:
    return FormulationConfig(
        model_kind=ModelKind.parse(args.model),
        switch_limit=args.switch_limit,
        angle_bound=args.angle_bound,
        reference_bus=_coerce_id(system, args.ref_bus),
        penalty_enabled=penalty_enabled,
    )


def _contingencies(args, system: PowerSystem):
    whitelist = None
    if args.contingencies:
        try:
            raw = load_contingency_whitelist(args.contingencies)
        except (OSError, ValueError) as exc:
            raise InputError(f"contingency whitelist: {exc}") from exc
        by_str = {str(k.id): k.id for k in system.lines}
        whitelist = {by_str.get(str(c), c) for c in raw}
    return build_contingency_set(system, whitelist=whitelist,
                                 strict_islanding=args.strict_islanding)


def _solve_one(system, scen, contingencies, cfg, opts):
    prob = assemble(system, scen, contingencies, cfg)
    result = solve(prob, opts)
    return prob, result


def cmd_run(args) -> int:
    system, scen = _load_inputs(args)
    system, penalty_enabled = _apply_penalty(system, args.penalty)
    cfg = _build_config(args, system, penalty_enabled)
    contingencies = _contingencies(args, system)
    opts = SolveOptions(mip_gap=args.mip_gap, time_limit=args.time_limit,
                        deterministic_seed=args.seed)
    prob, result = _solve_one(system, scen, contingencies, cfg, opts)
    if result.status is SolveStatus.INFEASIBLE:
        print("solve: infeasible")
        return EXIT_INFEASIBLE
    if not result.status.has_solution:
        print(f"solve failed: {result.status.value} {result.message}")
        return EXIT_INFEASIBLE
    sol = metrics.extract_schedule(prob, result)
    violations = metrics.verify_solution(sol, system, scen, contingencies, cfg)
    if violations:
        for v in violations[:20]:
            print(f"verification: {v}")
        print(f"verification failed with {len(violations)} violations")
        return EXIT_MISMATCH
    report = metrics.build_report(sol, system, scen, contingencies, cfg)
    metrics.write_report(report, args.out_dir)
    if args.penalty_table and penalty_enabled:
        from dataclasses import replace as _replace
        off_cfg = _replace(cfg, penalty_enabled=False)
        prob_off, result_off = _solve_one(system, scen, contingencies,
                                          off_cfg, opts)
        if result_off.status.has_solution:
            sol_off = metrics.extract_schedule(prob_off, result_off)
            rep_off = metrics.build_report(sol_off, system, scen,
                                           contingencies, off_cfg)
            table = metrics.reports_to_table_csv(
                {"penalty_on": report, "penalty_off": rep_off})
            out = Path(args.out_dir)
            (out / "report_table.csv").write_text(table)
            print(f"penalty table written to {out / 'report_table.csv'}")
    print(f"status: {result.status.value}")
    print(f"objective: {result.objective:.2f}")
    print(f"total cost: {report.total_cost:.2f}")
    print(f"bcc: {report.bcc:.4f} MW  pcc: {report.pcc:.4f} MW")
    print(f"emissions: {report.emissions:.1f} lbs")
    print(f"switching actions: {len(report.switching_actions)}")
    print(f"report written to {Path(args.out_dir) / 'report.json'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    system, scen = _load_inputs(args)
    contingencies = _contingencies(args, system)
    opts = SolveOptions(mip_gap=args.mip_gap, time_limit=args.time_limit,
                        deterministic_seed=args.seed)
    rows = []
    for factor in args.factors:
        if factor < 0:
            raise InputError(f"factor must be >= 0, got {factor}")
        scaled = scale_penetration(scen, factor)
        for model in ("sscuc", "sscuc-cnr"):
            for penalty_on in (True, False):
                cfg = FormulationConfig(
                    model_kind=ModelKind.parse(model),
                    switch_limit=args.switch_limit,
                    angle_bound=args.angle_bound,
                    reference_bus=_coerce_id(system, args.ref_bus),
                    penalty_enabled=penalty_on,
                )
                row = {"factor": factor, "model": model,
                       "penalty": "on" if penalty_on else "off"}
                try:
                    prob, result = _solve_one(system, scaled, contingencies,
                                              cfg, opts)
                    if not result.status.has_solution:
                        row["status"] = result.status.value
                    else:
                        sol = metrics.extract_schedule(prob, result)
                        rep = metrics.build_report(sol, system, scaled,
                                                   contingencies, cfg)
                        row.update({
                            "status": result.status.value,
                            "total_cost": f"{rep.total_cost:.6f}",
                            "bcc": f"{rep.bcc:.6f}",
                            "pcc": f"{rep.pcc:.6f}",
                            "emissions": f"{rep.emissions:.6f}",
                        })
                except SolverError as exc:
                    row["status"] = f"error: {exc}"
                rows.append(row)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweep_path = out / "sweep.csv"
    with open(sweep_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["factor", "model", "penalty", "status",
                            "total_cost", "bcc", "pcc", "emissions"],
            lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    print(f"{len(rows)} sweep rows written to {sweep_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    system, scen = _load_inputs(args)
    system, penalty_enabled = _apply_penalty(system, args.penalty)
    cfg = _build_config(args, system, penalty_enabled)
    contingencies = _contingencies(args, system)
    opts = SolveOptions(mip_gap=0.0, time_limit=args.time_limit,
                        deterministic_seed=args.seed)

    try:
        oracle_result = oracle.enumerate_commitments(
            system, scen, contingencies, cfg)
    except oracle.CapExceeded as exc:
        print(f"oracle caps exceeded: {exc}")
        return EXIT_CAPS

    prob, result = _solve_one(system, scen, contingencies, cfg, opts)
    certificate = {
        "milp_status": result.status.value,
        "milp_objective": (result.objective
                           if result.status.has_solution else None),
        "oracle_objective": oracle_result.best_objective,
        "oracle_lp_solves": oracle_result.lp_solves,
        "oracle_best_assignment": oracle_result.best_assignment,
        "assignments": [
            {"assignment": rec.assignment, "status": rec.status,
             "objective": rec.objective}
            for rec in oracle_result.records
        ],
    }
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "certificate.json").write_text(
        json.dumps(certificate, indent=2, sort_keys=True) + "\n")

    if result.status is SolveStatus.INFEASIBLE and not oracle_result.feasible:
        print("verify: both paths report infeasible")
        return EXIT_OK
    if result.status is SolveStatus.INFEASIBLE or not oracle_result.feasible:
        print(f"verify MISMATCH: milp={result.status.value} "
              f"oracle_feasible={oracle_result.feasible}")
        return EXIT_MISMATCH

    milp_obj = result.objective
    oracle_obj = oracle_result.best_objective
    drift = abs(milp_obj - oracle_obj) / max(1.0, abs(oracle_obj))
    sol = metrics.extract_schedule(prob, result)
    violations = metrics.verify_solution(sol, system, scen, contingencies, cfg)
    print(f"milp objective:   {milp_obj:.6f}")
    print(f"oracle objective: {oracle_obj:.6f} ({oracle_result.lp_solves} LPs)")
    print(f"constraint violations: {len(violations)}")
    if drift > 1e-6 or violations:
        print(f"verify MISMATCH: relative drift {drift:.3g}, "
              f"{len(violations)} violations")
        return EXIT_MISMATCH
    print("verify: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridsched",
        description="Day-ahead stochastic N-1 unit commitment with "
                    "corrective network reconfiguration")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one model and write reports")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="penetration sweep")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--factors", type=float, nargs="+", required=True,
                         help="availability scale factors")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="MILP vs exhaustive oracle")
    _add_common_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except oracle.CapExceeded as exc:
        print(f"caps exceeded: {exc}", file=_sys.stderr)
        return EXIT_CAPS
    except SolverError as exc:
        print(f"solver error: {exc}", file=_sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    raise SystemExit(main())
