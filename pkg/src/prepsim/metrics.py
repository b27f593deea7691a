"""Cost criteria and the per-run summary record (one comparison-table row).

All integrals use trapezoidal quadrature on the integrator's own sample
grid; the criteria run over the treatment window [0, T_e] while max S*u
is taken over the whole horizon.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .integrate import Trajectory
from .sequence import RunResult

SUMMARY_COLUMNS = ("case", "Te", "J_uI", "J_I", "J_te", "I_Te", "max_Su", "u_max")


@dataclass(frozen=True)
class RunSummary:
    """Criteria values and extremes for one run (units: individuals, years)."""

    case: str
    T_e: float
    J_u_plus_I: float
    J_I: float
    J_te: float
    I_at_Te: float
    max_Su: float
    u_max_observed: float
    J_classical: float = math.nan  # weighted cost over the full horizon; not a table column


def _index_of(traj: Trajectory, t_end: float) -> int:
    if math.isnan(t_end) or t_end < 0 or t_end > traj.t[-1] + 1e-12:
        raise ValueError(f"t_end={t_end} outside the trajectory range [0, {traj.t[-1]}]")
    h = traj.t[1] - traj.t[0]
    i = round(t_end / h)
    i = min(max(i, 0), len(traj) - 1)
    return i


def _trapz(y: np.ndarray, t: np.ndarray) -> float:
    h = t[1] - t[0]
    return float(h * (y.sum() - 0.5 * (y[0] + y[-1])))


def cost_JuI(traj: Trajectory, T_e: float) -> float:
    """Integral of u^2 + I^2 over the treatment window [0, T_e]."""
    i = _index_of(traj, T_e)
    if i == 0:
        return 0.0
    y = traj.u[: i + 1] ** 2 + traj.I[: i + 1] ** 2
    return _trapz(y, traj.t[: i + 1])


def cost_JI(traj: Trajectory, T_e: float) -> float:
    """Integral of I^2 over [0, T_e]."""
    i = _index_of(traj, T_e)
    if i == 0:
        return 0.0
    return _trapz(traj.I[: i + 1] ** 2, traj.t[: i + 1])


def cost_Jte(traj: Trajectory, T_e: float) -> float:
    """Time-weighted integral of tau * (u^2 + I^2) over [0, T_e]."""
    i = _index_of(traj, T_e)
    if i == 0:
        return 0.0
    sl = slice(0, i + 1)
    y = traj.t[sl] * (traj.u[sl] ** 2 + traj.I[sl] ** 2)
    return _trapz(y, traj.t[sl])


def cost_classical(traj: Trajectory, w1: float, w2: float, t_f: float) -> float:
    """Weighted cost integral of w1*I + w2*u^2 over [0, t_f]."""
    i = _index_of(traj, t_f)
    if i == 0:
        return 0.0
    sl = slice(0, i + 1)
    return _trapz(w1 * traj.I[sl] + w2 * traj.u[sl] ** 2, traj.t[sl])


def summarize(run: RunResult, case: str = "", w1: float = 1.0, w2: float = 1.0) -> RunSummary:
    """Evaluate every criterion and extreme for one run."""
    traj = run.trajectory
    i_te = _index_of(traj, run.T_e)
    return RunSummary(
        case=case,
        T_e=run.T_e,
        J_u_plus_I=cost_JuI(traj, run.T_e),
        J_I=cost_JI(traj, run.T_e),
        J_te=cost_Jte(traj, run.T_e),
        I_at_Te=float(traj.I[i_te]),
        max_Su=float(traj.su().max()),
        u_max_observed=float(traj.u.max()),
        J_classical=cost_classical(traj, w1, w2, float(traj.t[-1])),
    )


def summary_csv_row(s: RunSummary) -> str:
    vals = (s.T_e, s.J_u_plus_I, s.J_I, s.J_te, s.I_at_Te, s.max_Su, s.u_max_observed)
    return s.case + "," + ",".join(f"{v:.17g}" for v in vals)


def write_summary_csv(summaries, path) -> None:
    """One row per run, columns exactly case,Te,J_uI,J_I,J_te,I_Te,max_Su,u_max."""
    if isinstance(summaries, RunSummary):
        summaries = [summaries]
    with open(path, "w") as f:
        f.write(",".join(SUMMARY_COLUMNS) + "\n")
        for s in summaries:
            f.write(summary_csv_row(s) + "\n")


def read_summary_csv(path) -> list[RunSummary]:
    """Parse rows written by write_summary_csv (J_classical is not a CSV column)."""
    out = []
    with open(path) as f:
        header = f.readline().strip()
        if header != ",".join(SUMMARY_COLUMNS):
            raise ValueError(f"unexpected summary header in {path}: {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(SUMMARY_COLUMNS):
                raise ValueError(f"malformed summary row in {path}: {line!r}")
            case = parts[0]
            te, j_ui, j_i, j_te, i_te, max_su, u_max = (float(p) for p in parts[1:])
            out.append(RunSummary(case, te, j_ui, j_i, j_te, i_te, max_su, u_max))
    return out


def write_summary_json(s: RunSummary, path, extra: dict | None = None) -> None:
    record = asdict(s)
    if extra:
        record.update(extra)
    with open(path, "w") as f:
        json.dump(record, f, indent=2, default=float)
        f.write("\n")
