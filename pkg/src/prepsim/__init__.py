"""Simulation and control toolkit for PrEP rollout in the SICAE HIV model.

Exposes the compartmental dynamics, a fixed-step integrator, the discrete
model-free feedback law with its two-phase sequencer, cost criteria, a
forward-backward-sweep optimal control solver, and a derivative-free tuner.
"""

from .controller import ControllerGains, ControllerState, controller_step
from .integrate import DivergenceError, IntegrationConfig, Trajectory, simulate
from .metrics import RunSummary, cost_classical, cost_JI, cost_Jte, cost_JuI, summarize
from .model import (
    DEFAULT_INITIAL,
    DEFAULT_PARAMS,
    ModelParams,
    StateVector,
    derivative,
    force_of_infection,
)
from .sequence import RunResult, SequencePlan, constraint_clamp, phase1_control, run_sequence

__all__ = [
    "ControllerGains",
    "ControllerState",
    "controller_step",
    "DivergenceError",
    "IntegrationConfig",
    "Trajectory",
    "simulate",
    "RunSummary",
    "cost_classical",
    "cost_JI",
    "cost_Jte",
    "cost_JuI",
    "summarize",
    "DEFAULT_INITIAL",
    "DEFAULT_PARAMS",
    "ModelParams",
    "StateVector",
    "derivative",
    "force_of_infection",
    "RunResult",
    "SequencePlan",
    "constraint_clamp",
    "phase1_control",
    "run_sequence",
]

__version__ = "0.1.0"
