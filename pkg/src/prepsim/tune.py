"""Derivative-free tuning of the control sequence against a chosen criterion.

A bounded Nelder-Mead direct search over any subset of the ramp parameters
(u0, L, Q, u_max) and feedback gains (K_p, K_i, k_alpha, k_beta).  Candidates
are clipped to the box before evaluation, every evaluation is logged, and the
whole search is deterministic for a given seed.  Infeasible points (max S*u
above the bound) pay an additive penalty instead of being discarded, so the
search still returns something useful when the feasible set is empty.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .controller import ControllerGains
from .integrate import IntegrationConfig
from .metrics import RunSummary, summarize
from .model import ModelParams, StateVector
from .sequence import SequencePlan, run_sequence

OBJECTIVES = ("J_u_plus_I", "J_I", "J_te", "I_at_Te", "weighted")

PLAN_FIELDS = ("u0", "L", "Q", "u_max")
GAIN_FIELDS = ("K_p", "K_i", "k_alpha", "k_beta")
TUNABLE_FIELDS = PLAN_FIELDS + GAIN_FIELDS


@dataclass(frozen=True)
class TuneSpec:
    """What to minimize, over which box, and with what budget."""

    objective: str = "J_u_plus_I"
    weights: dict | None = None            # objective == "weighted": summary field -> weight
    bounds: dict = field(default_factory=dict)  # tunable name -> (lo, hi)
    infeasibility_penalty: float = 100.0   # per individual/year of max(0, max_Su - gamma_max)
    simplex_init_scale: float = 0.15       # initial vertex offset, fraction of box width
    max_evals: int = 400
    ftol: float = 1e-4                     # relative simplex spread termination
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.objective == "weighted" and not self.weights:
            raise ValueError("weighted objective needs a weights mapping")
        if not self.bounds:
            raise ValueError("bounds must name at least one tunable parameter")
        for name, (lo, hi) in self.bounds.items():
            if name not in TUNABLE_FIELDS:
                raise ValueError(f"unknown tunable {name!r}, expected one of {TUNABLE_FIELDS}")
            if not lo <= hi:
                raise ValueError(f"bounds for {name} must satisfy lo <= hi")
        if self.max_evals <= 0:
            raise ValueError("max_evals must be positive")


@dataclass
class TuneEval:
    """One objective evaluation: the candidate and everything it produced."""

    params: dict
    summary: RunSummary
    objective: float
    penalized: float
    feasible: bool


@dataclass
class TuneResult:
    best_params: dict
    best_summary: RunSummary
    log: list
    all_infeasible: bool = False
    evaluations: int = 0


def objective_value(summary: RunSummary, spec: TuneSpec) -> float:
    if spec.objective == "weighted":
        total = 0.0
        for name, w in spec.weights.items():
            total += w * float(getattr(summary, name))
        return total
    attr = {"J_u_plus_I": "J_u_plus_I", "J_I": "J_I", "J_te": "J_te", "I_at_Te": "I_at_Te"}
    return float(getattr(summary, attr[spec.objective]))


def write_tune_log_csv(log, path) -> None:
    """Every evaluation as one CSV row: parameters, then the full summary."""
    if not log:
        raise ValueError("empty evaluation log")
    names = sorted(log[0].params)
    header = names + ["objective", "penalized", "feasible",
                      "Te", "J_uI", "J_I", "J_te", "I_Te", "max_Su", "u_max"]
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for ev in log:
            s = ev.summary
            row = [f"{ev.params[n]:.17g}" for n in names]
            row += [f"{ev.objective:.17g}", f"{ev.penalized:.17g}", str(int(ev.feasible))]
            row += [f"{v:.17g}" for v in (s.T_e, s.J_u_plus_I, s.J_I, s.J_te,
                                          s.I_at_Te, s.max_Su, s.u_max_observed)]
            f.write(",".join(row) + "\n")


def _apply(names, x, plan: SequencePlan, gains: ControllerGains):
    plan_over = {n: float(v) for n, v in zip(names, x) if n in PLAN_FIELDS}
    gain_over = {n: float(v) for n, v in zip(names, x) if n in GAIN_FIELDS}
    if plan_over:
        plan = replace(plan, **plan_over)
    if gain_over:
        gains = replace(gains, **gain_over)
    return plan, gains


def tune(spec: TuneSpec, plan: SequencePlan, gains: ControllerGains,
         params: ModelParams, cfg: IntegrationConfig, initial: StateVector,
         **run_kwargs) -> TuneResult:
    """Search the box for the best penalized objective; returns the best point,
    its summary, and the complete evaluation log.

    ``run_kwargs`` are forwarded to run_sequence (control period, psi policy).
    Restarts from the incumbent when the simplex collapses before the budget
    is spent.
    """
    names = sorted(spec.bounds)
    lo = np.array([spec.bounds[n][0] for n in names], dtype=float)
    hi = np.array([spec.bounds[n][1] for n in names], dtype=float)
    x0 = np.array([_template_value(n, plan, gains) for n in names], dtype=float)
    x0 = np.clip(x0, lo, hi)
    rng = np.random.default_rng(spec.seed)

    log: list[TuneEval] = []

    def evaluate(x):
        x = np.clip(x, lo, hi)
        cand_plan, cand_gains = _apply(names, x, plan, gains)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = run_sequence(initial, cand_plan, cand_gains, params, cfg, **run_kwargs)
        summary = summarize(result)
        base = objective_value(summary, spec)
        excess = max(0.0, summary.max_Su - cand_plan.gamma_max - 1e-9)
        penalized = base + spec.infeasibility_penalty * excess
        log.append(TuneEval(dict(zip(names, map(float, x))), summary, base, penalized, excess == 0.0))
        return penalized

    evaluate(x0)  # the template point always enters the log
    _nelder_mead(evaluate, x0, lo, hi, spec, rng, log)

    best_idx = int(np.argmin([ev.penalized for ev in log]))
    best = log[best_idx]
    all_infeasible = not any(ev.feasible for ev in log)
    if all_infeasible:
        warnings.warn("every evaluated point violates the mixed constraint; "
                      "returning the best penalized one")
    return TuneResult(best_params=dict(best.params), best_summary=best.summary,
                      log=log, all_infeasible=all_infeasible, evaluations=len(log))


def _template_value(name, plan, gains):
    return getattr(plan, name) if name in PLAN_FIELDS else getattr(gains, name)


def _nelder_mead(evaluate, x0, lo, hi, spec: TuneSpec, rng, log):
    """Standard reflect/expand/contract/shrink simplex with box clipping,
    restarted from the incumbent while budget remains."""
    dim = len(x0)
    budget = spec.max_evals
    best_x, best_f = None, np.inf
    center = x0

    while len(log) + dim + 1 <= budget:
        verts = [np.clip(center, lo, hi)]
        for i in range(dim):
            v = center.copy()
            width = hi[i] - lo[i]
            offset = spec.simplex_init_scale * width * (0.5 + rng.random())
            v[i] = v[i] + offset if rng.random() < 0.5 else v[i] - offset
            verts.append(np.clip(v, lo, hi))
        fs = [evaluate(v) for v in verts]

        while len(log) < budget:
            order = np.argsort(fs)
            verts = [verts[i] for i in order]
            fs = [fs[i] for i in order]
            if fs[0] < best_f:
                best_f, best_x = fs[0], verts[0].copy()
            spread = abs(fs[-1] - fs[0])
            if spread <= spec.ftol * max(1.0, abs(fs[0])):
                break
            centroid = np.mean(verts[:-1], axis=0)
            xr = np.clip(centroid + (centroid - verts[-1]), lo, hi)
            fr = evaluate(xr)
            if fs[0] <= fr < fs[-2]:
                verts[-1], fs[-1] = xr, fr
                continue
            if fr < fs[0]:
                xe = np.clip(centroid + 2.0 * (centroid - verts[-1]), lo, hi)
                if len(log) >= budget:
                    verts[-1], fs[-1] = xr, fr
                    break
                fe = evaluate(xe)
                if fe < fr:
                    verts[-1], fs[-1] = xe, fe
                else:
                    verts[-1], fs[-1] = xr, fr
                continue
            xc = np.clip(centroid + 0.5 * (verts[-1] - centroid), lo, hi)
            if len(log) >= budget:
                break
            fc = evaluate(xc)
            if fc < fs[-1]:
                verts[-1], fs[-1] = xc, fc
                continue
            # shrink toward the best vertex
            for i in range(1, dim + 1):
                if len(log) >= budget:
                    break
                verts[i] = np.clip(verts[0] + 0.5 * (verts[i] - verts[0]), lo, hi)
                fs[i] = evaluate(verts[i])

        order = np.argsort(fs)
        if fs[order[0]] < best_f:
            best_f, best_x = fs[order[0]], verts[order[0]].copy()
        center = best_x
    return best_x if best_x is not None else x0, best_f
