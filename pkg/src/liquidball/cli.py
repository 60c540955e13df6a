"""Scenario runner: evolution, wave and verification commands with CSV
time series, a plain-text summary and a companion gnuplot script.

Exit codes: 0 success, 1 check failure, 2 configuration error,
3 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .boundary import BallDomain
from .charts import SpacetimeChart
from .config import ConfigError, ScenarioConfig, load_config
from .energies import base_energy, energy_breakdown
from .eos import EosAssumptionError, build_affine, validate_assumptions
from .inequalities import ALL_SUITES, VerifyContext, verify_suite
from .radial import (
    NumericalAbort,
    acoustic_period,
    add_acoustic_perturbation,
    cfl_time_step,
    hydrostatic_equilibrium,
    residuals,
    step,
    volume_mesh,
    volume_ode,
)
from .wave import WaveProblem, fundamental_mode, wave_solve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

RUN_COLUMNS = ["t", "R", "E0", "E00", "E10", "E01", "K1", "EW0", "EW1", "E1",
               "lambda_max", "taylor_delta", "vol_ode", "vol_mesh",
               "res_wave", "res_constraint",
               "theta_max", "iota0", "K", "taylor_delta_prime"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header_lines, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\r\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_plot_script(path: Path, csv_name: str, columns, ycols):
    lines = [
        "set datafile separator ','",
        "set key outside",
        "set xlabel 't'",
        "set logscale y",
        "plot " + ", \\\n     ".join(
            f"'{csv_name}' using 1:{columns.index(c) + 1} with lines title '{c}'"
            for c in ycols),
    ]
    path.write_text("\n".join(lines) + "\n")


def _build_state(cfg: ScenarioConfig):
    chart = SpacetimeChart(cfg.chart_type, cfg.chart_k)
    eos = build_affine(cfg.eos_c2, cfg.eos_eps0, cfg.eos_A)
    st = hydrostatic_equilibrium(chart, eos, cfg.grid_n, cfg.radius)
    if cfg.scenario == "oscillate" and cfg.init_amplitude > 0:
        st = add_acoustic_perturbation(st, cfg.init_amplitude, cfg.init_mode)
    return chart, eos, st


def _assumption_lines(cfg: ScenarioConfig, eos) -> list:
    rep = validate_assumptions(eos)
    return [
        f"config: {cfg.echo()}",
        f"assumptions: sound_speed_ok={rep.sound_speed_ok} "
        f"L1={rep.L1:g} L2={rep.L2:g} enthalpy_floor={rep.sigma_floor:g} "
        f"e_deriv_sup={rep.e_deriv_sup:g}",
    ]


def run_evolution_command(cfg: ScenarioConfig, out_dir: Path) -> int:
    chart, eos, st = _build_state(cfg)
    dt = cfg.time_dt if cfg.time_dt is not None else 0.5 * cfl_time_step(st, 1.0)
    n_steps = int(math.ceil(cfg.time_t_end / dt))
    stride = max(1, n_steps // 400)
    dom = BallDomain(st.boundary_radius)
    rows = []
    checks = {"constraint_max": 0.0, "e1_bound": True, "taylor_positive": True}
    e1_first = None

    def record(state, res_constraint):
        nonlocal e1_first
        bd = energy_breakdown(state)
        res = residuals(state)
        tm = state.taylor_margin()
        R = state.boundary_radius
        if e1_first is None:
            e1_first = bd.er[1]
        if bd.er[1] > 2.0 * e1_first:
            checks["e1_bound"] = False
        if cfg.chart_type == "trap" and tm.delta <= 0:
            checks["taylor_positive"] = False
        rows.append([
            state.t, R, bd.e0, bd.ekl[(0, 0)], bd.ekl[(1, 0)], bd.ekl[(0, 1)],
            bd.kr[1], bd.ewr[0], bd.ewr[1], bd.er[1], bd.lambda_max,
            tm.delta, volume_ode(state), volume_mesh(state),
            res.wave_equation_l2, res_constraint,
            math.sqrt(2.0) / R, R, math.sqrt(2.0) / R + 1.0 / R,
            tm.delta_prime,
        ])

    cur = st
    record(cur, float(np.max(np.abs(cur.constraint_residual()))))
    for i in range(n_steps):
        cur, rep = step(cur, dt, cfl_limit=1.0)
        checks["constraint_max"] = max(checks["constraint_max"], rep.constraint_max)
        if (i + 1) % stride == 0 or i == n_steps - 1:
            record(cur, rep.constraint_max)

    csv_path = out_dir / "energies.csv"
    _write_csv(csv_path, _assumption_lines(cfg, eos), RUN_COLUMNS, rows)
    _write_plot_script(out_dir / "energies.plt", csv_path.name, RUN_COLUMNS,
                       ["E0", "E1", "EW0"])

    ok = checks["constraint_max"] <= 1e-8 and checks["taylor_positive"]
    if cfg.scenario == "oscillate":
        ok = ok and checks["e1_bound"]
    summary = [
        f"scenario: {cfg.scenario}",
        f"steps: {n_steps}  dt: {_fmt(dt)}",
        f"constraint_max: {_fmt(checks['constraint_max'])} "
        f"(pass: {checks['constraint_max'] <= 1e-8})",
        f"grade-1 energy bound E1(t) <= 2 E1(0): {checks['e1_bound']}",
        f"sign-condition margin positive: {checks['taylor_positive']}",
        f"result: {'PASS' if ok else 'FAIL'}",
    ]
    (out_dir / "summary.txt").write_text(
        "\n".join(_assumption_lines(cfg, eos) + summary) + "\n")
    print("\n".join(summary))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def run_wave_command(cfg: ScenarioConfig, out_dir: Path) -> int:
    chart = SpacetimeChart(cfg.chart_type, cfg.chart_k)
    eos = build_affine(cfg.eos_c2, cfg.eos_eps0, cfg.eos_A)
    profile, _ = fundamental_mode(cfg.radius, cfg.init_mode)
    amp = cfg.init_amplitude

    def psi0(r):
        return amp * profile(r)

    prob = WaveProblem(chart, eos, cfg.radius, psi0=psi0)
    hist = wave_solve(prob, n=cfg.grid_n, dt=cfg.time_dt, t_end=cfg.time_t_end)
    rows = [[hist.times[i], hist.energy[i], hist.psi_center[i]]
            for i in range(len(hist.times))]
    cols = ["t", "Ew", "psi_center"]
    _write_csv(out_dir / "wave.csv", _assumption_lines(cfg, eos), cols, rows)
    _write_plot_script(out_dir / "wave.plt", "wave.csv", cols, ["Ew"])
    expected = cfg.init_mode * math.pi * eos.eta / cfg.radius
    summary = [
        f"wave energy drift: {_fmt(hist.energy_drift)}",
        f"measured frequency: {_fmt(hist.frequency_estimate)} "
        f"(separated-mode value {_fmt(expected)})",
    ]
    (out_dir / "summary.txt").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return EXIT_OK


def run_verify_command(cfg: ScenarioConfig, out_dir: Path, suite: str) -> int:
    names = ALL_SUITES if suite in ("all", None) else (suite,)
    ctx = VerifyContext.build()
    rows = []
    all_ok = True
    for name in names:
        rep = verify_suite(name, ctx, seed=cfg.seed)
        all_ok = all_ok and rep.all_ok
        for inst in rep.instances:
            rows.append([name, inst.index, inst.lhs, inst.rhs,
                         "" if inst.degenerate else inst.ratio,
                         rep.passed and rep.degenerate_ok,
                         "" if rep.convergence_order is None
                         else rep.convergence_order])
        print(f"{name:14s} constant={rep.empirical_constant:10.4f} "
              f"budget={rep.budget:6.2f} pass={rep.all_ok}")
    cols = ["suite", "instance", "lhs", "rhs", "ratio", "pass", "order"]
    _write_csv(out_dir / "report.csv", [f"seed: {cfg.seed}"], cols, rows)
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def run_report_command(cfg: ScenarioConfig, out_dir: Path, as_json: bool) -> int:
    chart, eos, st = _build_state(cfg)
    dt = cfg.time_dt if cfg.time_dt is not None else 0.5 * cfl_time_step(st, 1.0)
    n_steps = int(math.ceil(cfg.time_t_end / dt))
    stride = max(1, n_steps // 100)
    breakdowns = [energy_breakdown(st).as_flat_dict()]
    cur = st
    for i in range(n_steps):
        cur, _ = step(cur, dt, cfl_limit=1.0)
        if (i + 1) % stride == 0 or i == n_steps - 1:
            breakdowns.append(energy_breakdown(cur).as_flat_dict())
    if as_json:
        text = json.dumps(breakdowns, indent=1)
        (out_dir / "report.json").write_text(text + "\n")
        print(text)
    else:
        keys = list(breakdowns[0])
        print(" ".join(keys))
        for bd in breakdowns:
            print(" ".join(_fmt(bd[k]) for k in keys))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="liquidball",
        description="free-boundary relativistic liquid ball laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "wave", "verify", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON scenario configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        if name == "verify":
            p.add_argument("--suite", default="all")
        if name == "report":
            p.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        if args.seed is not None:
            cfg.seed = args.seed
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out if args.out is not None else cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "run":
            return run_evolution_command(cfg, out_dir)
        if args.command == "wave":
            return run_wave_command(cfg, out_dir)
        if args.command == "verify":
            return run_verify_command(cfg, out_dir, args.suite)
        return run_report_command(cfg, out_dir, args.json)
    except (EosAssumptionError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
