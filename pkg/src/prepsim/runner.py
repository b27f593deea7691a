"""Scenario execution: run one config, tune one config, batch the whole table.

Every scenario writes into its own directory: trajectory.csv, summary.csv
(one table row), summary.json (full record), and the I-versus-t and
u-versus-t plots unless suppressed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import replace
from pathlib import Path

from .config import TABLE1_CASES, ScenarioConfig, load_scenario
from .integrate import simulate
from .metrics import (
    SUMMARY_COLUMNS,
    RunSummary,
    read_summary_csv,
    summarize,
    write_summary_csv,
    write_summary_json,
)
from .ocp import solve_ocp
from .sequence import RunResult, run_sequence
from .tune import TuneResult, tune, write_tune_log_csv


def execute(cfg: ScenarioConfig, step: float | None = None) -> RunResult:
    """Produce the RunResult for a scenario (no files written)."""
    icfg = cfg.integration if step is None else replace(cfg.integration, step_h=step)
    if cfg.method == "uncontrolled":
        traj = simulate(cfg.initial, lambda t, s: 0.0, cfg.params, icfg)
        return RunResult(traj, T_e=0.0, switch_time=None)
    if cfg.method == "model_free":
        return run_sequence(cfg.initial, cfg.plan, cfg.gains, cfg.params, icfg,
                            **cfg.controller.run_kwargs())
    oc = cfg.oc if step is None else replace(cfg.oc, step_h=step)
    result = solve_ocp(cfg.params, cfg.initial, oc)
    return result.as_run_result()


def run_scenario(cfg: ScenarioConfig, out_dir=None, *, step: float | None = None,
                 plots: bool = True) -> tuple[RunSummary, Path]:
    """Run one scenario and write its artifacts; returns (summary, directory)."""
    result = execute(cfg, step=step)
    w1, w2 = cfg.weights
    summary = summarize(result, case=cfg.case, w1=w1, w2=w2)

    out = Path(out_dir or cfg.output_dir or f"out/{cfg.case}")
    out.mkdir(parents=True, exist_ok=True)
    result.trajectory.write_csv(out / "trajectory.csv")
    write_summary_csv(summary, out / "summary.csv")
    write_summary_json(summary, out / "summary.json", extra={
        "switch_time": result.switch_time,
        "no_switch": result.no_switch,
        "method": cfg.method,
        "w1": w1,
        "w2": w2,
    })
    if plots:
        from .plots import plot_control, plot_infected
        plot_infected(result.trajectory, out / "infected_vs_t.svg",
                      title=f"{cfg.case}: infected individuals")
        plot_control(result.trajectory, out / "control_vs_t.svg",
                     title=f"{cfg.case}: PrEP medication rate")
    return summary, out


def tune_scenario(cfg: ScenarioConfig, out_dir=None, *, seed: int | None = None,
                  plots: bool = True) -> tuple[TuneResult, RunSummary, Path]:
    """Tune a model_free scenario, then re-run the best point at full resolution.

    The search itself evaluates on the (usually coarser) tune grid; the
    returned summary and written artifacts come from the scenario grid.
    """
    if cfg.method != "model_free" or cfg.tune is None:
        raise ValueError(f"scenario {cfg.case} has no tunable model_free block")
    spec = cfg.tune if seed is None else replace(cfg.tune, seed=seed)
    search_cfg = cfg.integration
    if cfg.tune_step_h is not None:
        search_cfg = replace(cfg.integration, step_h=cfg.tune_step_h)
    result = tune(spec, cfg.plan, cfg.gains, cfg.params, search_cfg, cfg.initial,
                  **cfg.controller.run_kwargs())

    plan_fields = {f.name for f in dataclasses.fields(cfg.plan)}
    best_plan = replace(cfg.plan, **{k: v for k, v in result.best_params.items()
                                     if k in plan_fields})
    best_gains = replace(cfg.gains, **{k: v for k, v in result.best_params.items()
                                       if k not in plan_fields})
    tuned = replace(cfg, plan=best_plan, gains=best_gains, tune=None)
    summary, out = run_scenario(tuned, out_dir=out_dir, plots=plots)
    write_tune_log_csv(result.log, out / "tune_log.csv")
    with open(out / "best_params.txt", "w") as f:
        for k, v in sorted(result.best_params.items()):
            f.write(f"{k} = {v:.17g}\n")
    return result, summary, out


def compare_runs(summary_paths, ref_index: int = 0):
    """Build a comparison table across summary files with deltas to a reference row.

    Returns (text_table, csv_text); each non-reference row is followed by a
    delta row against the designated reference.
    """
    rows: list[RunSummary] = []
    for p in summary_paths:
        rows.extend(read_summary_csv(p))
    if not rows:
        raise ValueError("no summary rows to compare")
    if not 0 <= ref_index < len(rows):
        raise ValueError(f"reference index {ref_index} out of range for {len(rows)} rows")
    ref = rows[ref_index]

    def fmt(v):
        return f"{v:.4g}"

    header = list(SUMMARY_COLUMNS)
    table = [header]
    csv_lines = [",".join(header + ["is_delta"])]
    for i, s in enumerate(rows):
        vals = [s.T_e, s.J_u_plus_I, s.J_I, s.J_te, s.I_at_Te, s.max_Su, s.u_max_observed]
        table.append([s.case] + [fmt(v) for v in vals])
        csv_lines.append(",".join([s.case] + [f"{v:.17g}" for v in vals] + ["0"]))
        if i != ref_index:
            deltas = [s.T_e - ref.T_e, s.J_u_plus_I - ref.J_u_plus_I, s.J_I - ref.J_I,
                      s.J_te - ref.J_te, s.I_at_Te - ref.I_at_Te, s.max_Su - ref.max_Su,
                      s.u_max_observed - ref.u_max_observed]
            table.append([f"  vs {ref.case}"] + [f"{d:+.4g}" for d in deltas])
            csv_lines.append(",".join([f"delta_vs_{ref.case}"]
                                      + [f"{d:.17g}" for d in deltas] + ["1"]))

    widths = [max(len(r[c]) for r in table) for c in range(len(header))]
    text = "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in table)
    return text, "\n".join(csv_lines) + "\n"


def run_table1(out_dir="out/table1", *, step: float | None = None, plots: bool = True,
               cases=TABLE1_CASES):
    """Run every bundled comparison scenario and write the combined table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for case in cases:
        cfg = load_scenario(case)
        summary, _ = run_scenario(cfg, out_dir=out / case, step=step, plots=plots)
        summaries.append(summary)
    write_summary_csv(summaries, out / "table1.csv")
    text, csv_text = compare_runs([out / "table1.csv"], ref_index=0)
    (out / "comparison.csv").write_text(csv_text)
    (out / "comparison.txt").write_text(text + "\n")
    return summaries, out
