"""Fixed-step integration of the SICAE system with per-step control injection.

The control source is sampled once per step and held constant across it
(zero-order hold), which matches the sample-and-hold semantics of the
discrete feedback law driving it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, StateVector, make_rhs

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class IntegrationConfig:
    step_h: float = 1e-3    # step size (years)
    t_final: float = 25.0   # horizon (years)
    method: str = "rk4"     # rk4 | euler

    def __post_init__(self):
        if not 0.0 < self.step_h <= self.t_final:
            raise ValueError("step_h must satisfy 0 < step_h <= t_final")
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"unknown method {self.method!r}, expected 'rk4' or 'euler'")
        n = round(self.t_final / self.step_h)
        if n < 1 or abs(n * self.step_h - self.t_final) > _GRID_TOL * max(1.0, self.t_final):
            raise ValueError("t_final must be an integer number of steps")

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.step_h)


class DivergenceError(RuntimeError):
    """State became non-finite during integration."""

    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite state after step {step} (t = {t:.6g})")
        self.step = step
        self.t = t


@dataclass
class Trajectory:
    """Time-ordered samples of the state and the applied control."""

    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    C: np.ndarray
    A: np.ndarray
    E: np.ndarray
    u: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def totals(self) -> np.ndarray:
        return self.S + self.I + self.C + self.A + self.E

    def su(self) -> np.ndarray:
        return self.S * self.u

    def state_at(self, i: int) -> StateVector:
        return StateVector(self.S[i], self.I[i], self.C[i], self.A[i], self.E[i], t=self.t[i])

    def write_csv(self, path) -> None:
        data = np.column_stack([self.t, self.S, self.I, self.C, self.A, self.E, self.u, self.su()])
        np.savetxt(path, data, delimiter=",", header="t,S,I,C,A,E,u,Su", comments="", fmt="%.17g")


def simulate(initial: StateVector, control_source, params: ModelParams,
             cfg: IntegrationConfig) -> Trajectory:
    """Integrate the model under a per-step control callback.

    ``control_source(t, (S, I, C, A, E)) -> u`` is called once per sample
    in time order (including the final one, whose value is recorded but no
    longer applied) and must return a fraction in [0, 1].
    """
    values = initial.as_tuple()
    if not all(math.isfinite(v) for v in values):
        raise ValueError("initial state must be finite")
    if any(v < 0 for v in values):
        raise ValueError("initial compartments must be nonnegative")

    rhs = make_rhs(params)
    h = cfg.step_h
    n = cfg.n_steps
    hh = 0.5 * h
    h6 = h / 6.0
    euler = cfg.method == "euler"
    isfinite = math.isfinite

    S, I, C, A, E = values
    ts = [0.0] * (n + 1)
    Ss = [0.0] * (n + 1)
    Is = [0.0] * (n + 1)
    Cs = [0.0] * (n + 1)
    As = [0.0] * (n + 1)
    Es = [0.0] * (n + 1)
    us = [0.0] * (n + 1)

    for i in range(n):
        t = i * h
        u = control_source(t, (S, I, C, A, E))
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"control source returned u={u} outside [0, 1] at t={t:.6g}")
        ts[i] = t
        Ss[i] = S
        Is[i] = I
        Cs[i] = C
        As[i] = A
        Es[i] = E
        us[i] = u
        if euler:
            dS, dI, dC, dA, dE = rhs(S, I, C, A, E, u)
            S += h * dS
            I += h * dI
            C += h * dC
            A += h * dA
            E += h * dE
        else:
            a1, b1, c1, d1, e1 = rhs(S, I, C, A, E, u)
            a2, b2, c2, d2, e2 = rhs(S + hh * a1, I + hh * b1, C + hh * c1, A + hh * d1, E + hh * e1, u)
            a3, b3, c3, d3, e3 = rhs(S + hh * a2, I + hh * b2, C + hh * c2, A + hh * d2, E + hh * e2, u)
            a4, b4, c4, d4, e4 = rhs(S + h * a3, I + h * b3, C + h * c3, A + h * d3, E + h * e3, u)
            S += h6 * (a1 + 2.0 * (a2 + a3) + a4)
            I += h6 * (b1 + 2.0 * (b2 + b3) + b4)
            C += h6 * (c1 + 2.0 * (c2 + c3) + c4)
            A += h6 * (d1 + 2.0 * (d2 + d3) + d4)
            E += h6 * (e1 + 2.0 * (e2 + e3) + e4)
        if not isfinite(S + I + C + A + E):
            raise DivergenceError(i + 1, (i + 1) * h)

    t = n * h
    u = control_source(t, (S, I, C, A, E))
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"control source returned u={u} outside [0, 1] at t={t:.6g}")
    ts[n] = t
    Ss[n] = S
    Is[n] = I
    Cs[n] = C
    As[n] = A
    Es[n] = E
    us[n] = u

    return Trajectory(
        t=np.asarray(ts), S=np.asarray(Ss), I=np.asarray(Is), C=np.asarray(Cs),
        A=np.asarray(As), E=np.asarray(Es), u=np.asarray(us),
    )
