"""Scenario configuration: YAML ingestion, validation, bundled scenarios.

A scenario file is a nested key-value document selecting one method
(model_free, classical_oc, or uncontrolled) plus optional overrides of the
model parameters, initial conditions, integration grid, and a tuning block.
Validation errors always name the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .controller import PSI_UPDATES, ControllerGains
from .integrate import IntegrationConfig
from .model import ModelParams, StateVector
from .ocp import OcConfig
from .sequence import SequencePlan
from .tune import TuneSpec

METHODS = ("model_free", "classical_oc", "uncontrolled")

TABLE1_CASES = (
    "unconstrained_slope",
    "constrained_slope_1",
    "constrained_slope_2",
    "constrained_quad_1",
    "constrained_quad_2",
    "oc_unconstrained",
    "oc_constrained",
)
BUNDLED_CASES = TABLE1_CASES + ("uncontrolled",)


class ConfigError(ValueError):
    """A scenario document failed validation; the message names the field."""


@dataclass
class ControllerOptions:
    """Feedback-law policy knobs that are not tuning gains."""

    control_period: float = 0.01     # years between feedback updates
    psi_update: str = "verbatim"     # verbatim | error
    seed_floor: float = 1.0          # individuals; floor on the integral seed
    antiwindup: bool = True
    psi0_scale: float = 1.0          # >1 starts the law saturated at u_max
    normalize_y: bool = False        # feed I/N instead of raw counts

    def run_kwargs(self) -> dict:
        return dict(control_period=self.control_period, psi_update=self.psi_update,
                    seed_floor=self.seed_floor, antiwindup=self.antiwindup,
                    psi0_scale=self.psi0_scale, normalize_y=self.normalize_y)


@dataclass
class ScenarioConfig:
    case: str
    method: str
    params: ModelParams
    initial: StateVector
    integration: IntegrationConfig
    plan: SequencePlan | None = None
    gains: ControllerGains | None = None
    controller: ControllerOptions = field(default_factory=ControllerOptions)
    oc: OcConfig | None = None
    weights: tuple = (1.0, 1.0)      # (w1, w2) for the reported weighted cost
    tune: TuneSpec | None = None
    tune_step_h: float | None = None  # coarser grid for tuning evaluations
    output_dir: str | None = None


def _take(block: dict, name: str, cls, **defaults):
    try:
        return cls(**{**defaults, **block})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _expect_mapping(doc, key):
    block = doc.get(key) or {}
    if not isinstance(block, dict):
        raise ConfigError(f"{key}: expected a mapping, got {type(block).__name__}")
    return dict(block)


def build_scenario(doc: dict, case: str = "") -> ScenarioConfig:
    """Validate a parsed scenario document and construct every component."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a mapping")
    unknown = set(doc) - {"case", "method", "params", "initial", "integration", "plan",
                          "gains", "controller", "oc", "weights", "tune", "output_dir"}
    if unknown:
        raise ConfigError(f"unknown top-level fields: {sorted(unknown)}")

    method = doc.get("method")
    if method not in METHODS:
        raise ConfigError(f"method: must be one of {METHODS}, got {method!r}")

    params = _take(_expect_mapping(doc, "params"), "params", ModelParams)
    init_block = _expect_mapping(doc, "initial")
    initial = _take(init_block, "initial", StateVector,
                    S=10000.0, I=200.0, C=0.0, A=0.0, E=0.0)
    integration = _take(_expect_mapping(doc, "integration"), "integration", IntegrationConfig)

    plan = gains = oc = None
    if method == "model_free":
        if "plan" not in doc:
            raise ConfigError("plan: required for method model_free")
        if "gains" not in doc:
            raise ConfigError("gains: required for method model_free")
        if "oc" in doc:
            raise ConfigError("oc: not allowed for method model_free")
        plan = _take(_expect_mapping(doc, "plan"), "plan", SequencePlan)
        gains = _take(_expect_mapping(doc, "gains"), "gains", ControllerGains)
    elif method == "classical_oc":
        if "oc" not in doc:
            raise ConfigError("oc: required for method classical_oc")
        for bad in ("plan", "gains", "tune"):
            if bad in doc:
                raise ConfigError(f"{bad}: not allowed for method classical_oc")
        oc = _take(_expect_mapping(doc, "oc"), "oc", OcConfig)
    else:
        for bad in ("plan", "gains", "oc", "tune"):
            if bad in doc:
                raise ConfigError(f"{bad}: not allowed for method uncontrolled")

    ctrl_block = _expect_mapping(doc, "controller")
    controller = _take(ctrl_block, "controller", ControllerOptions)
    if controller.psi_update not in PSI_UPDATES:
        raise ConfigError(f"controller.psi_update: must be one of {PSI_UPDATES}")

    weights = doc.get("weights") or {}
    if not isinstance(weights, dict) or set(weights) - {"w1", "w2"}:
        raise ConfigError("weights: expected a mapping with keys w1, w2")
    w1 = float(weights.get("w1", 1.0))
    w2 = float(weights.get("w2", 1.0))

    tune_spec = None
    tune_step = None
    if "tune" in doc and doc["tune"] is not None:
        tblock = _expect_mapping(doc, "tune")
        tune_step = tblock.pop("step_h", None)
        bounds = tblock.get("bounds") or {}
        tblock["bounds"] = {k: tuple(v) for k, v in bounds.items()}
        tune_spec = _take(tblock, "tune", TuneSpec)

    return ScenarioConfig(
        case=doc.get("case") or case or "scenario",
        method=method,
        params=params,
        initial=initial,
        integration=integration,
        plan=plan,
        gains=gains,
        controller=controller,
        oc=oc,
        weights=(w1, w2),
        tune=tune_spec,
        tune_step_h=tune_step,
        output_dir=doc.get("output_dir"),
    )


def load_scenario(source) -> ScenarioConfig:
    """Load a scenario from a YAML path or a bundled scenario name."""
    path = Path(source)
    if path.suffix in (".yaml", ".yml") or path.exists():
        if not path.exists():
            raise ConfigError(f"scenario file not found: {source}")
        text = path.read_text()
        case = path.stem
    else:
        name = str(source)
        if name not in BUNDLED_CASES:
            raise ConfigError(
                f"{source!r} is neither a file nor a bundled scenario; "
                f"bundled names: {', '.join(BUNDLED_CASES)}")
        text = bundled_scenario_text(name)
        case = name
    doc = yaml.safe_load(text)
    return build_scenario(doc, case=case)


def bundled_scenario_text(name: str) -> str:
    ref = resources.files("prepsim") / "scenarios" / f"{name}.yaml"
    return ref.read_text()
