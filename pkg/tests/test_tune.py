import numpy as np
import pytest

from prepsim import ControllerGains, IntegrationConfig, SequencePlan
from prepsim.tune import TuneSpec, tune, write_tune_log_csv

PLAN = SequencePlan(shape="slope", u0=0.0, L=0.3, u_max=0.7,
                    gamma_max=2000.0, constraint_enabled=True)
GAINS = ControllerGains(K_p=5e-4, K_i=1.0, k_alpha=300.0, k_beta=1e-3)
CFG = IntegrationConfig(step_h=0.02, t_final=25.0)


def small_spec(**over):
    base = dict(objective="I_at_Te",
                bounds={"L": (0.2, 0.6), "K_p": (2e-4, 1e-3)},
                max_evals=40, seed=7)
    base.update(over)
    return TuneSpec(**base)


def test_degenerate_single_point_box(params, initial):
    spec = small_spec(bounds={"L": (0.3, 0.3)}, max_evals=8)
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    assert result.best_params == {"L": 0.3}


def test_bounds_respected_for_every_candidate(params, initial):
    spec = small_spec()
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    for ev in result.log:
        assert 0.2 <= ev.params["L"] <= 0.6
        assert 2e-4 <= ev.params["K_p"] <= 1e-3
    assert result.evaluations <= spec.max_evals


def test_feasible_points_pay_no_penalty(params, initial):
    spec = small_spec()
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    assert not result.all_infeasible
    for ev in result.log:
        if ev.feasible:
            assert ev.penalized == ev.objective


def test_best_so_far_nonincreasing(params, initial):
    spec = small_spec()
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    best = np.minimum.accumulate([ev.penalized for ev in result.log])
    assert all(b <= a + 1e-12 for a, b in zip(best, best[1:]))


def test_seeded_reruns_are_bit_identical(params, initial):
    spec = small_spec(max_evals=25)
    r1 = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    r2 = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    assert len(r1.log) == len(r2.log)
    for a, b in zip(r1.log, r2.log):
        assert a.params == b.params
        assert a.penalized == b.penalized


def test_weighted_objective(params, initial):
    spec = small_spec(objective="weighted",
                      weights={"J_u_plus_I": 1.0, "I_at_Te": 2500.0}, max_evals=30)
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    ev = result.log[0]
    expect = ev.summary.J_u_plus_I + 2500.0 * ev.summary.I_at_Te
    assert ev.objective == pytest.approx(expect, rel=1e-12)


def test_log_export(tmp_path, params, initial):
    spec = small_spec(max_evals=10)
    result = tune(spec, PLAN, GAINS, params, CFG, initial, control_period=0.02)
    path = tmp_path / "log.csv"
    write_tune_log_csv(result.log, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("K_p,L,objective")
    assert len(lines) == len(result.log) + 1


def test_all_infeasible_flagged_with_warning(params, initial):
    # unconstrained runs against an unreachable bound: every point violates it
    plan = SequencePlan(shape="slope", u0=0.0, L=0.3, u_max=0.7,
                        gamma_max=1.0, constraint_enabled=False)
    spec = small_spec(max_evals=10)
    with pytest.warns(UserWarning, match="violates the mixed constraint"):
        result = tune(spec, plan, GAINS, params, CFG, initial, control_period=0.02)
    assert result.all_infeasible
    assert result.best_summary.max_Su > 1.0
    for ev in result.log:
        assert ev.penalized > ev.objective


def test_spec_validation():
    with pytest.raises(ValueError):
        TuneSpec(objective="nope", bounds={"L": (0.0, 1.0)})
    with pytest.raises(ValueError):
        TuneSpec(objective="weighted", bounds={"L": (0.0, 1.0)})  # missing weights
    with pytest.raises(ValueError):
        TuneSpec(objective="J_I", bounds={})
    with pytest.raises(ValueError):
        TuneSpec(objective="J_I", bounds={"zmystery": (0.0, 1.0)})
    with pytest.raises(ValueError):
        TuneSpec(objective="J_I", bounds={"L": (1.0, 0.0)})
