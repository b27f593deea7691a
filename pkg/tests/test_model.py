import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prepsim import ModelParams, StateVector, derivative, force_of_infection
from prepsim.model import make_rhs


def test_force_of_infection_no_infectives(params):
    state = StateVector(S=10200.0, I=0.0, C=0.0, A=0.0, E=0.0)
    assert force_of_infection(state, params) == 0.0


def test_force_of_infection_infected_only(params):
    # hand arithmetic: 0.582 * 200 / 10200
    state = StateVector(S=10000.0, I=200.0, C=0.0, A=0.0, E=0.0)
    lam = force_of_infection(state, params)
    assert math.isclose(lam, 0.582 * 200.0 / 10200.0, rel_tol=1e-15)
    assert math.isclose(lam, 0.0114118, rel_tol=1e-5)


def test_force_of_infection_chronic_only(params):
    # hand arithmetic: 0.582 * 0.04 * 100 / 10200
    state = StateVector(S=10000.0, I=0.0, C=100.0, A=0.0, E=0.0)
    lam = force_of_infection(state, params)
    assert math.isclose(lam, 0.582 * 0.04 * 100.0 / 10200.0, rel_tol=1e-15)
    assert math.isclose(lam, 2.2824e-4, rel_tol=1e-4)


def test_force_of_infection_clamps_roundoff_negatives(params):
    state = StateVector(S=10000.0, I=-1e-9, C=-1e-9, A=-1e-9, E=0.0)
    assert force_of_infection(state, params) == 0.0


def test_force_of_infection_rejects_non_finite(params):
    state = StateVector(S=math.nan, I=0.0, C=0.0, A=0.0, E=0.0)
    with pytest.raises(ValueError):
        force_of_infection(state, params)


def test_derivative_at_baseline_initial_conditions(params, initial):
    """Independent evaluation of the controlled right-hand side, u = 0."""
    mu, beta, N = params.mu, params.beta, params.N
    S, I = initial.S, initial.I
    lam = beta * I / N
    expect = (
        mu * N - lam * S - mu * S,                       # dS
        lam * S - (params.rho + params.phi + mu) * I,    # dI
        params.phi * I,                                  # dC
        params.rho * I,                                  # dA
        0.0,                                             # dE
    )
    got = derivative(initial, 0.0, params)
    np.testing.assert_allclose(got, expect, rtol=1e-14)
    # values rounded to two decimals
    np.testing.assert_allclose(got, (-111.24, -108.76, 200.0, 20.0, 0.0), atol=5e-3)


def test_derivative_disease_free_equilibrium(params):
    state = StateVector(S=params.N, I=0.0, C=0.0, A=0.0, E=0.0)
    np.testing.assert_allclose(derivative(state, 0.0, params), 0.0, atol=1e-12)


def test_derivative_rejects_control_out_of_bounds(params, initial):
    with pytest.raises(ValueError):
        derivative(initial, 1.5, params)
    with pytest.raises(ValueError):
        derivative(initial, -0.1, params)


compartments = st.floats(min_value=0.0, max_value=10200.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(S=compartments, I=compartments, C=compartments, A=compartments,
       u=st.floats(min_value=0.0, max_value=1.0))
def test_derivative_sum_matches_population_balance(S, I, C, A, u):
    """Sum of derivatives equals mu*(N - total) under Lambda = mu*N, d = 0."""
    params = ModelParams()
    E = 10200.0 - min(S + I + C + A, 10200.0)  # keep the state in range
    state = StateVector(S, I, C, A, E)
    d = derivative(state, u, params)
    expected = params.mu * (params.N - state.total())
    assert math.isclose(sum(d), expected, rel_tol=0.0, abs_tol=1e-10 * params.N)


@settings(max_examples=200, deadline=None)
@given(I=compartments, C=compartments, A=compartments,
       scale=st.floats(min_value=0.0, max_value=1.0))
def test_force_of_infection_scales_linearly(I, C, A, scale):
    params = ModelParams()
    base = force_of_infection(StateVector(0.0, I, C, A, 0.0), params)
    scaled = force_of_infection(StateVector(0.0, scale * I, scale * C, scale * A, 0.0), params)
    assert math.isclose(scaled, scale * base, rel_tol=1e-12, abs_tol=1e-15)


def test_conservation_exact_when_total_is_N(params):
    state = StateVector(S=5000.0, I=2500.0, C=1500.0, A=700.0, E=500.0)
    assert state.total() == params.N
    d = derivative(state, 0.37, params)
    assert abs(sum(d)) < 1e-12 * params.N


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(N=0.0)
    with pytest.raises(ValueError):
        ModelParams(eta_A=0.9)
    with pytest.raises(ValueError):
        ModelParams(eta_C=1.2)
    with pytest.raises(ValueError):
        ModelParams(beta=-0.1)


def test_recruitment_defaults_to_mu_N(params):
    assert math.isclose(params.recruitment, params.mu * params.N, rel_tol=1e-15)
    open_pop = ModelParams(Lambda=300.0, d=1.0)
    assert open_pop.recruitment == 300.0


def test_n_tracks_sum_divides_by_instantaneous_total():
    params = ModelParams(n_tracks_sum=True)
    state = StateVector(S=4000.0, I=100.0, C=0.0, A=0.0, E=0.0)
    lam = force_of_infection(state, params)
    assert math.isclose(lam, 0.582 * 100.0 / 4100.0, rel_tol=1e-15)
    # the rhs closure uses the same divisor
    d = make_rhs(params)(*state.as_tuple(), 0.0)
    assert math.isclose(d[2], params.phi * 100.0, rel_tol=1e-15)


def test_rhs_closure_consistent_with_force_of_infection(params):
    state = StateVector(S=8000.0, I=150.0, C=60.0, A=10.0, E=1980.0)
    lam = force_of_infection(state, params)
    dS, dI, dC, dA, dE = make_rhs(params)(*state.as_tuple(), 0.0)
    # the I equation isolates lam*S
    implied = dI + (params.rho + params.phi + params.mu) * state.I \
        - params.alpha * state.A - params.omega * state.C
    assert math.isclose(implied, lam * state.S, rel_tol=1e-12)
