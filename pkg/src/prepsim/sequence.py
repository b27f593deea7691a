"""Two-phase control sequence: open-loop ramp, then model-free feedback.

Phase 1 raises the medication along a linear or quadratic schedule until
the planned ceiling u_max is reached; phase 2 hands the measured infected
count to the discrete feedback law, which relaxes the medication back
toward zero.  Every applied value passes the mixed-constraint clamp
S*u <= gamma_max, and once the feedback output has died off the treatment
is switched off for the rest of the run.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .controller import ControllerGains, ControllerState, controller_step
from .integrate import IntegrationConfig, Trajectory, simulate
from .model import ModelParams, StateVector

SHAPES = ("slope", "quadratic")


@dataclass(frozen=True)
class SequencePlan:
    """First-sequence shape and the bounds the applied control must respect."""

    shape: str = "slope"            # slope | quadratic
    u0: float = 0.0                 # initial control fraction
    L: float = 0.0                  # linear ramp rate (1/years)
    Q: float = 0.0                  # quadratic ramp coefficient (1/years^2)
    u_max: float = 0.7              # phase-switch ceiling (fraction)
    gamma_max: float = 2000.0       # mixed-constraint bound on S*u (individuals/year)
    constraint_enabled: bool = True
    epsilon_off: float = 1e-3       # treatment-off threshold (fraction)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")
        if not 0.0 <= self.u0 <= self.u_max <= 1.0:
            raise ValueError("need 0 <= u0 <= u_max <= 1")
        if self.L < 0 or self.Q < 0:
            raise ValueError("ramp coefficients L, Q must be nonnegative")
        if not self.gamma_max > 0:
            raise ValueError("gamma_max must be positive")
        if not self.epsilon_off > 0:
            raise ValueError("epsilon_off must be positive")


@dataclass
class RunResult:
    """One closed-loop (or open-loop) run plus its treatment window."""

    trajectory: Trajectory
    T_e: float                     # end of treatment: u = 0 from here on (years)
    switch_time: float | None      # phase-1 -> phase-2 time, None if never switched
    no_switch: bool = False


def _phase1_raw(t: float, plan: SequencePlan) -> float:
    if plan.shape == "slope":
        return plan.u0 + plan.L * t
    return plan.u0 + plan.Q * t * t


def phase1_control(t: float, plan: SequencePlan) -> float:
    """Open-loop ramp value at time t, capped at the plan ceiling."""
    return min(_phase1_raw(t, plan), plan.u_max)


def constraint_clamp(u_raw: float, S: float, plan: SequencePlan) -> float:
    """Clamp a candidate control so S*u <= gamma_max (when enabled) and u in [0, 1]."""
    u = u_raw
    if plan.constraint_enabled and S > 0.0:
        bound = plan.gamma_max / S
        while bound * S > plan.gamma_max:  # round the quotient down so the product holds exactly
            bound = math.nextafter(bound, 0.0)
        if u > bound:
            u = bound
    if u < 0.0:
        return 0.0
    return u if u < 1.0 else 1.0


def run_sequence(initial: StateVector, plan: SequencePlan, gains: ControllerGains,
                 params: ModelParams, cfg: IntegrationConfig, *,
                 control_period: float | None = None, psi_update: str = "verbatim",
                 seed_floor: float = 1.0, antiwindup: bool = True,
                 psi0_scale: float = 1.0, normalize_y: bool = False) -> RunResult:
    """Run the full two-phase sequence and report the treatment window.

    The switch fires at the first sample where the pre-clamp ramp reaches
    u_max (the clamped value may never get there under the constraint);
    that sample still applies u_max, and the feedback law takes over from
    the next one, initialized so its first output equals u_max.  The law
    is stepped every ``control_period`` years (one integration step if
    None) and its output is held in between; the clamp is re-evaluated
    against the current S at every sample.
    """
    h = cfg.step_h
    every = 1 if control_period is None else max(1, round(control_period / h))
    dt_ctrl = every * h
    y_scale = params.N if normalize_y else 1.0

    mode = 0                    # 0 ramp, 1 feedback, 2 off
    y_min = math.inf
    switch_t: float | None = None
    t_off: float | None = None
    next_ctrl = 0
    held = 0.0
    idx = -1
    ctrl = ControllerState()

    def source(t, state):
        nonlocal mode, y_min, switch_t, t_off, next_ctrl, held, idx, ctrl
        idx += 1
        S = state[0]
        y = state[1] / y_scale
        if y < y_min:
            y_min = y
        if mode == 2:
            return 0.0
        if mode == 0:
            if _phase1_raw(t, plan) >= plan.u_max:
                mode = 1
                switch_t = t
                ctrl = ControllerState(y_ref=y_min, u_handoff=plan.u_max)
                next_ctrl = idx + 1
                held = plan.u_max
            else:
                held = phase1_control(t, plan)
        elif idx >= next_ctrl:
            held, _ = controller_step(ctrl, y, gains, dt_ctrl, plan.u_max,
                                      psi_update=psi_update, seed_floor=seed_floor,
                                      antiwindup=antiwindup, psi0_scale=psi0_scale)
            next_ctrl = idx + every
        applied = constraint_clamp(held, S, plan)
        if mode == 1 and applied <= plan.epsilon_off:
            mode = 2
            t_off = t
            return 0.0
        return applied

    traj = simulate(initial, source, params, cfg)

    if mode == 0:
        warnings.warn(f"no-switch: ramp never reached u_max={plan.u_max} by t_final={cfg.t_final}")
        T_e = cfg.t_final if (traj.u > plan.epsilon_off).any() else 0.0
        return RunResult(traj, T_e=T_e, switch_time=None, no_switch=True)
    if t_off is not None:
        return RunResult(traj, T_e=t_off, switch_time=switch_t)
    return RunResult(traj, T_e=cfg.t_final, switch_time=switch_t)
