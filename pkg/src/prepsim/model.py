"""SICAE compartmental model: parameters, state, and ODE right-hand side.

Compartments: susceptible (S), HIV-infected pre-AIDS (I), chronic under
ART (C), symptomatic AIDS (A), and on PrEP (E).  The control u(t) is the
fraction of susceptibles put on PrEP per unit time, so a flow S*u moves
from S into E.  With recruitment locked to mu*N and no AIDS-induced
deaths the total population stays at N; that is the configuration every
controlled run uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_RATE_FIELDS = ("mu", "beta", "eta_C", "eta_A", "theta", "omega", "rho", "phi", "alpha", "d")


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of the SICAE model (all rates are 1/year).

    Defaults are the values used by every bundled scenario.  ``Lambda``
    left as None means recruitment mu*N, which together with d = 0 makes
    the population constant; set an explicit ``Lambda`` and d > 0 to
    recover the open-population variant.
    """

    N: float = 10200.0           # total population (individuals)
    mu: float = 1.0 / 69.54      # natural death rate
    beta: float = 0.582          # effective contact rate
    eta_C: float = 0.04          # infectiousness modifier, chronic stage (<= 1)
    eta_A: float = 1.35          # infectiousness modifier, AIDS stage (>= 1)
    theta: float = 0.001         # PrEP stop rate
    omega: float = 0.09          # ART stop rate
    rho: float = 0.1             # progression rate I -> A
    phi: float = 1.0             # ART start rate I -> C
    alpha: float = 0.33          # AIDS treatment rate A -> I
    d: float = 0.0               # AIDS-induced death rate
    Lambda: float | None = None  # recruitment (individuals/year); None means mu*N
    n_tracks_sum: bool = False   # contact normalization uses S+I+C+A+E instead of N

    def __post_init__(self):
        if not self.N > 0:
            raise ValueError("N must be positive")
        for name in _RATE_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.eta_A < 1.0:
            raise ValueError("eta_A must be >= 1")
        if self.eta_C > 1.0:
            raise ValueError("eta_C must be <= 1")
        if self.Lambda is not None and self.Lambda < 0:
            raise ValueError("Lambda must be nonnegative")

    @property
    def recruitment(self) -> float:
        return self.mu * self.N if self.Lambda is None else self.Lambda


@dataclass(frozen=True)
class StateVector:
    """Compartment populations at one time instant (individuals)."""

    S: float
    I: float
    C: float
    A: float
    E: float
    t: float = 0.0

    def total(self) -> float:
        return self.S + self.I + self.C + self.A + self.E

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.S, self.I, self.C, self.A, self.E)


DEFAULT_PARAMS = ModelParams()
DEFAULT_INITIAL = StateVector(S=10000.0, I=200.0, C=0.0, A=0.0, E=0.0)


def _check_finite(values) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"state components must be finite, got {values}")


def force_of_infection(state: StateVector, params: ModelParams) -> float:
    """Per-susceptible infection rate beta/N * (I + eta_C*C + eta_A*A).

    Negative round-off values of I, C, A are treated as zero so the rate
    stays meaningful on trajectories produced by a fixed-step integrator.
    """
    values = state.as_tuple()
    _check_finite(values)
    S, I, C, A, E = values
    weighted = max(I, 0.0) + params.eta_C * max(C, 0.0) + params.eta_A * max(A, 0.0)
    divisor = state.total() if params.n_tracks_sum else params.N
    if divisor <= 0:
        raise ValueError("population divisor must be positive")
    return params.beta * weighted / divisor


def make_rhs(params: ModelParams):
    """Build the scalar right-hand-side closure used on the hot path.

    Returns rhs(S, I, C, A, E, u) -> (dS, dI, dC, dA, dE).  Parameters are
    unpacked once so a fixed-step loop does not pay attribute lookups on
    every evaluation.
    """
    N = params.N
    mu = params.mu
    beta = params.beta
    eta_C = params.eta_C
    eta_A = params.eta_A
    theta = params.theta
    omega = params.omega
    rho = params.rho
    phi = params.phi
    alpha = params.alpha
    recruit = params.recruitment
    out_I = params.rho + params.phi + params.mu
    out_C = params.omega + params.mu
    out_A = params.alpha + params.mu + params.d
    out_E = params.mu + params.theta
    beta_over_N = beta / N
    tracks_sum = params.n_tracks_sum

    def rhs(S, I, C, A, E, u):
        weighted = (I if I > 0.0 else 0.0) \
            + eta_C * (C if C > 0.0 else 0.0) \
            + eta_A * (A if A > 0.0 else 0.0)
        if tracks_sum:
            lam = beta * weighted / (S + I + C + A + E)
        else:
            lam = beta_over_N * weighted
        new_infections = lam * S
        onto_prep = u * S
        return (
            recruit - new_infections - mu * S - onto_prep + theta * E,
            new_infections - out_I * I + alpha * A + omega * C,
            phi * I - out_C * C,
            rho * I - out_A * A,
            onto_prep - out_E * E,
        )

    return rhs


def derivative(state: StateVector, u: float, params: ModelParams) -> tuple[float, float, float, float, float]:
    """Time derivatives (dS, dI, dC, dA, dE) at the given state and control.

    With Lambda = mu*N and d = 0 the five components sum to zero for any
    state whose compartments sum to N (constant population).
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"control u={u} outside [0, 1]")
    values = state.as_tuple()
    _check_finite(values)
    return make_rhs(params)(*values, u)
