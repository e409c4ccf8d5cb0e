import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdwealth.errors import InvalidInputError
from crowdwealth.model import (
    AgentParams,
    CrowdState,
    ForceSeries,
    aggregate_observation,
    decide,
    response_scale,
    sign0,
    system_response,
)


def make_state(wealth, b, **kw):
    wealth = np.asarray(wealth, dtype=float)
    n = wealth.shape[0]
    return CrowdState(
        wealth=wealth,
        b=np.asarray(b, dtype=float),
        c=kw.pop("c", np.zeros(n)),
        noise_sigma=kw.pop("noise_sigma", np.zeros(n)),
        drift_mu=kw.pop("drift_mu", np.zeros(n)),
        **kw,
    )


def test_sign0_basics():
    assert sign0(3.5) == 1
    assert sign0(-0.1) == -1
    assert sign0(0.0) == 1
    assert sign0(0.0, scale=100.0) == 1


def test_sign0_cancellation_band():
    # residue of a cancelled O(1) sum is zero; a real signal is not
    assert sign0(-1e-18, 1.0) == 1
    assert sign0(1e-18, 1.0) == 1
    assert sign0(-1e-10, 1.0) == -1
    assert sign0(1e-10, 1.0) == 1


def test_agent_params_validation():
    AgentParams(b=0.5)
    AgentParams(b=-1.0, c=2.0, noise_sigma=0.1, drift_mu=-0.3)
    with pytest.raises(InvalidInputError):
        AgentParams(b=1.5)
    with pytest.raises(InvalidInputError):
        AgentParams(b=0.0, c=-1.0)
    with pytest.raises(InvalidInputError):
        AgentParams(b=0.0, noise_sigma=-0.1)
    with pytest.raises(InvalidInputError):
        AgentParams(b=float("nan"))


def test_state_validation():
    with pytest.raises(InvalidInputError):
        make_state([], [])
    with pytest.raises(InvalidInputError):
        make_state([1.0, -0.5], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        make_state([1.0, 1.0], [0.0, 1.2])
    with pytest.raises(InvalidInputError):
        make_state([1.0, 1.0], [0.0])
    with pytest.raises(InvalidInputError):
        make_state([1.0, 1.0], [0.0, 0.0], c=np.array([-1.0, 0.0]))


def test_state_last_sign_derived_from_last_dO():
    s = make_state([1.0, 1.0], [0.1, 0.2], last_dO=-2.0)
    assert s.last_sign == -1
    s = make_state([1.0, 1.0], [0.1, 0.2], last_dO=0.0)
    assert s.last_sign == 1  # sign convention at zero
    s = make_state([1.0, 1.0], [0.1, 0.2], last_dO=-2.0, last_sign=1)
    assert s.last_sign == 1  # explicit sign wins


def test_from_params_round_trip():
    params = [AgentParams(b=0.5, c=1.0), AgentParams(b=-0.25, noise_sigma=0.1)]
    s = CrowdState.from_params([2.0, 3.0], params)
    assert s.n_agents == 2
    assert s.params == params
    assert np.array_equal(s.wealth, [2.0, 3.0])
    with pytest.raises(InvalidInputError):
        CrowdState.from_params([1.0], params)


def test_normalized_wealth():
    s = make_state([1.0, 3.0], [0.0, 0.0])
    assert np.allclose(s.normalized_wealth(), [0.25, 0.75])
    z = make_state([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        z.normalized_wealth()


def test_copy_is_independent():
    s = make_state([1.0, 2.0], [0.5, -0.5], last_dO=3.0)
    s2 = s.copy()
    s2.wealth[0] = 99.0
    s2.t = 7
    assert s.wealth[0] == 1.0
    assert s.t == 0
    assert s2.last_dO == 3.0


def test_force_series():
    assert ForceSeries.zero().value_at(123) == 0.0
    assert ForceSeries.const(0.5).value_at(0) == 0.5
    f = ForceSeries.from_values([1.0, 2.0, 3.0])
    assert f.value_at(2) == 3.0
    assert f.covers(3)
    assert not f.covers(4)
    with pytest.raises(InvalidInputError):
        f.value_at(3)
    with pytest.raises(InvalidInputError):
        ForceSeries.const(float("inf"))


def test_decide_continuous():
    s = make_state([1.0, 1.0], [0.5, -0.5], c=np.array([2.0, 0.0]), last_dO=4.0)
    ds = decide(s, dE=1.0)
    assert np.allclose(ds, [2.0 + 0.5 * 4.0, -0.5 * 4.0])


def test_decide_binary_uses_sign_and_clamps():
    s = make_state([1.0, 1.0], [0.5, -0.5], c=np.array([2.0, 0.0]), last_dO=-4.0)
    ds = decide(s, dE=1.0, binary=True)
    # signal is sign(-4) = -1, then clamped to [-1, 1]
    assert np.allclose(ds, [1.0, 0.5])
    assert np.all(np.abs(ds) <= 1.0)


def test_decide_noise_needs_rng():
    s = make_state([1.0], [0.0], noise_sigma=np.array([0.1]))
    with pytest.raises(InvalidInputError):
        decide(s, dE=0.0)
    ds = decide(s, dE=0.0, rng=np.random.default_rng(0))
    assert ds.shape == (1,)


def test_decide_drift_without_noise_is_deterministic():
    s = make_state([1.0], [0.0], drift_mu=np.array([0.25]), last_dO=0.0)
    assert np.allclose(decide(s, dE=0.0), [0.25])


def test_aggregate_observation():
    s = make_state([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    assert aggregate_observation(s, np.array([1.0, -1.0, 0.5])) == 1.0 - 2.0 + 1.5
    with pytest.raises(InvalidInputError):
        aggregate_observation(s, np.array([1.0, 2.0]))


def test_system_response_and_scale():
    s = make_state([1.0, 2.0], [0.5, -0.5])
    assert system_response(s) == pytest.approx(1.0 * 0.5 - 2.0 * 0.5)
    assert response_scale(s) == pytest.approx(1.0 * 0.5 + 2.0 * 0.5)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=2, max_size=8),
    st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=2, max_size=8),
    st.floats(min_value=-10.0, max_value=10.0),
)
def test_pure_feedback_observation_identity(wealth, b, last_dO):
    # with no noise and no force, dO = last_dO * sum(A_i * b_i)
    n = min(len(wealth), len(b))
    s = make_state(wealth[:n], b[:n], last_dO=last_dO)
    ds = decide(s, dE=0.0)
    dO = aggregate_observation(s, ds)
    expected = last_dO * system_response(s)
    assert abs(dO - expected) <= 1e-9 * (1.0 + abs(expected))
