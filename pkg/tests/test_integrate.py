import numpy as np
import pytest

from prepsim import DivergenceError, IntegrationConfig, StateVector, simulate
from prepsim.model import make_rhs


def euler_oracle(initial, u, params, h, t_final):
    """Independent fixed-step Euler reference, final state only."""
    rhs = make_rhs(params)
    S, I, C, A, E = initial.as_tuple()
    for _ in range(round(t_final / h)):
        dS, dI, dC, dA, dE = rhs(S, I, C, A, E, u)
        S += h * dS
        I += h * dI
        C += h * dC
        A += h * dA
        E += h * dE
    return np.array([S, I, C, A, E])


def final_state(traj):
    return np.array([traj.S[-1], traj.I[-1], traj.C[-1], traj.A[-1], traj.E[-1]])


def test_sample_count():
    cfg = IntegrationConfig(step_h=0.01, t_final=25.0)
    assert cfg.n_steps == 2500
    traj = simulate(StateVector(10200.0, 0.0, 0.0, 0.0, 0.0),
                    lambda t, s: 0.0, __import__("prepsim").DEFAULT_PARAMS, cfg)
    assert len(traj) == 2501


def test_conservation_uncontrolled(params, initial):
    cfg = IntegrationConfig(step_h=1e-3, t_final=25.0)
    traj = simulate(initial, lambda t, s: 0.0, params, cfg)
    totals = traj.totals()
    np.testing.assert_allclose(totals, 10200.0, rtol=1e-6)


def test_rk4_matches_euler_oracle_short_horizon(params, initial):
    # brute-force Euler at a 1000x finer step as the reference
    cfg = IntegrationConfig(step_h=1e-2, t_final=2.0)
    traj = simulate(initial, lambda t, s: 0.5, params, cfg)
    ref = euler_oracle(initial, 0.5, params, 1e-5, 2.0)
    rel = np.abs(final_state(traj) - ref) / np.abs(ref)
    assert rel.max() < 1e-4


def test_rk4_order_halving_step(params, initial):
    """Halving h shrinks the global error roughly 16x (ratio in [8, 32])."""
    ref = euler_oracle(initial, 0.5, params, 1e-5, 10.0)
    errs = []
    for h in (1.0, 0.5):
        cfg = IntegrationConfig(step_h=h, t_final=10.0)
        traj = simulate(initial, lambda t, s: 0.5, params, cfg)
        errs.append(np.abs(final_state(traj) - ref).max())
    ratio = errs[0] / errs[1]
    assert 8.0 <= ratio <= 32.0


def test_disease_free_state_is_fixed(params):
    cfg = IntegrationConfig(step_h=0.01, t_final=5.0)
    dfe = StateVector(S=params.N, I=0.0, C=0.0, A=0.0, E=0.0)
    traj = simulate(dfe, lambda t, s: 0.0, params, cfg)
    assert abs(traj.S - params.N).max() < 1e-10
    for comp in (traj.I, traj.C, traj.A, traj.E):
        assert abs(comp).max() < 1e-10


def test_nonnegativity_along_trajectory(params, initial):
    rng = np.random.default_rng(0)
    us = rng.random(2501)
    cfg = IntegrationConfig(step_h=0.01, t_final=25.0)
    traj = simulate(initial, lambda t, s: us[min(int(round(t / 0.01)), 2500)], params, cfg)
    for comp in (traj.S, traj.I, traj.C, traj.A, traj.E):
        assert comp.min() >= -1e-9


def test_euler_method_supported(params, initial):
    cfg = IntegrationConfig(step_h=1e-3, t_final=1.0, method="euler")
    traj = simulate(initial, lambda t, s: 0.0, params, cfg)
    ref = euler_oracle(initial, 0.0, params, 1e-3, 1.0)
    np.testing.assert_allclose(final_state(traj), ref, rtol=1e-12)


def test_divergence_raises_with_step_index(params, initial):
    # Euler far outside its stability region blows up and must say where
    cfg = IntegrationConfig(step_h=5.0, t_final=5000.0, method="euler")
    with pytest.raises(DivergenceError) as err:
        simulate(initial, lambda t, s: 1.0, params, cfg)
    assert err.value.step > 0
    assert "step" in str(err.value)


def test_control_out_of_bounds_rejected(params, initial):
    cfg = IntegrationConfig(step_h=0.1, t_final=1.0)
    with pytest.raises(ValueError):
        simulate(initial, lambda t, s: 1.5, params, cfg)


def test_bad_configs_rejected():
    with pytest.raises(ValueError):
        IntegrationConfig(step_h=0.0, t_final=1.0)
    with pytest.raises(ValueError):
        IntegrationConfig(step_h=2.0, t_final=1.0)
    with pytest.raises(ValueError):
        IntegrationConfig(step_h=0.3, t_final=1.0)  # not an integer step count
    with pytest.raises(ValueError):
        IntegrationConfig(step_h=0.1, t_final=1.0, method="rk45")


def test_zero_order_hold_and_final_sample(params, initial):
    calls = []

    def source(t, state):
        calls.append(t)
        return 0.25

    cfg = IntegrationConfig(step_h=0.5, t_final=2.0)
    traj = simulate(initial, source, params, cfg)
    assert calls == [0.0, 0.5, 1.0, 1.5, 2.0]
    np.testing.assert_array_equal(traj.u, 0.25)


def test_trajectory_csv_schema(tmp_path, params, initial):
    cfg = IntegrationConfig(step_h=0.5, t_final=2.0)
    traj = simulate(initial, lambda t, s: 0.3, params, cfg)
    path = tmp_path / "trajectory.csv"
    traj.write_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,S,I,C,A,E,u,Su"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (5, 8)
    np.testing.assert_allclose(data[:, 1], traj.S, rtol=0.0)  # full precision round-trip
    np.testing.assert_allclose(data[:, 7], traj.S * traj.u, rtol=0.0)
