"""Discrete model-free feedback law: an integrator scaled by a recursive series.

Per sample the law tracks a running-minimum reference y* and emits

    u_k   = psi_k * sum_j K_i (y*_j - y_j) dt        (left Riemann sum)
    psi_k = psi_{k-1} + K_p (k_alpha exp(-k_beta k) - y_k)

so the medication keeps chasing the lowest infected count seen so far.
The exponential term shapes the transient; once it has decayed the series
is driven by the measurements alone.  The recursion above feeds the raw
measurement into psi; an alternative that feeds the tracking error
instead is selectable via ``psi_update="error"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PSI_UPDATES = ("verbatim", "error")


@dataclass(frozen=True)
class ControllerGains:
    """Tuning coefficients; all four must be strictly positive."""

    K_p: float      # series gain
    K_i: float      # integral gain
    k_alpha: float  # initialization amplitude
    k_beta: float   # initialization decay rate (per sample)

    def __post_init__(self):
        for name in ("K_p", "K_i", "k_alpha", "k_beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class ControllerState:
    """Evolving memory of the feedback law, owned by one simulation loop."""

    psi: float = 0.0
    integral_acc: float = 0.0
    k: int = 0
    y_ref: float = math.inf       # running-minimum tracking reference
    u_prev: float = 0.0
    u_handoff: float | None = None  # control at the phase switch; consumed by the first step


def controller_step(state: ControllerState, y_measured: float, gains: ControllerGains,
                    dt: float, u_max: float, *, psi_update: str = "verbatim",
                    seed_floor: float = 1.0, antiwindup: bool = True,
                    psi0_scale: float = 1.0):
    """Advance the law one sample; returns (u, state), mutating state in place.

    The reference is refreshed to min(y_ref, y) before the error is formed,
    the integral grows by one left-Riemann term K_i*(y_ref - y)*dt, the
    series is updated, and the emitted u = psi * integral is clamped to
    [0, u_max].

    On the first step with ``u_handoff`` set, psi is instead chosen so the
    raw output equals psi0_scale * u_handoff; after the [0, u_max] clamp
    the emitted value equals u_handoff, keeping the medication continuous
    across the phase switch.  A scale above one starts the law saturated,
    which holds the output at the ceiling until the series has unwound.
    The integral is seeded with the first Riemann term, floored in
    magnitude at a ``seed_floor``-individual error so the quotient stays
    finite when the measurement sits exactly on the reference.

    With ``antiwindup`` the integral is frozen while the output is pinned
    at u_max and the new term would push it further up.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (math.isfinite(y_measured) and y_measured >= 0):
        raise ValueError(f"measurement must be finite and nonnegative, got {y_measured}")
    if psi_update not in PSI_UPDATES:
        raise ValueError(f"psi_update must be one of {PSI_UPDATES}")

    if y_measured < state.y_ref:
        state.y_ref = y_measured
    error = state.y_ref - y_measured          # <= 0 by construction
    term = gains.K_i * error * dt
    state.k += 1

    if state.k == 1 and state.u_handoff is not None:
        if psi0_scale <= 0:
            raise ValueError("psi0_scale must be positive")
        floor = gains.K_i * seed_floor * dt
        seed = term if abs(term) >= floor else -floor
        state.integral_acc = seed
        state.psi = psi0_scale * state.u_handoff / seed
        u_raw = psi0_scale * state.u_handoff
    else:
        init = gains.k_alpha * math.exp(-gains.k_beta * state.k)
        if psi_update == "verbatim":
            state.psi += gains.K_p * (init - y_measured)
        else:
            state.psi += gains.K_p * (init + error)
        tentative = state.integral_acc + term
        u_raw = state.psi * tentative
        if antiwindup and u_raw > u_max and state.psi * term > 0.0:
            u_raw = state.psi * state.integral_acc
        else:
            state.integral_acc = tentative

    u = 0.0 if u_raw < 0.0 else (u_max if u_raw > u_max else u_raw)
    state.u_prev = u
    return u, state
