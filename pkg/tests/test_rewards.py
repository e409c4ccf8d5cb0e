import numpy as np
import pytest

from crowdwealth.errors import InvalidInputError
from crowdwealth.model import CrowdState, sign0
from crowdwealth.rewards import (
    RewardRegime,
    apply_floor,
    step_additive_random,
    step_feedback_binary,
    step_feedback_continuous,
    step_multiplicative_random,
)

BINARY = RewardRegime(kind="feedback-binary")


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


def test_apply_floor():
    w = np.array([0.2, 1.5, 0.5])
    assert np.allclose(apply_floor(w, 0.5), [0.5, 1.5, 0.5])
    with pytest.raises(InvalidInputError):
        apply_floor(w, -1.0)


def test_regime_validation():
    with pytest.raises(InvalidInputError):
        RewardRegime(kind="nope")
    with pytest.raises(InvalidInputError):
        RewardRegime(kind="additive-random")  # shock_scale missing
    with pytest.raises(InvalidInputError):
        RewardRegime(kind="multiplicative-random", shock_scale=0.0)
    with pytest.raises(InvalidInputError):
        RewardRegime(kind="feedback-binary", floor=-0.5)
    with pytest.raises(InvalidInputError):
        RewardRegime(kind="feedback-binary", trend_mode="sideways")


def test_binary_step_balanced_crowd():
    # A = [1, 1], b = [0.5, -0.5]: D = 0, so the trend holds at +1 and
    # decisions are ds = [0.5, -0.5]; rewards A*ds*(+1)
    s = make_state([1.0, 1.0], [0.5, -0.5], last_dO=1.0)
    out = step_feedback_binary(s, BINARY)
    assert out.trend_sign == 1
    assert out.sign_dO == 1
    assert np.allclose(out.rewards, [0.5, -0.5])
    assert np.allclose(s.wealth, [1.5, 0.5])
    assert s.t == 1


def test_binary_step_contrarian_crowd_flips():
    # all-contrarian crowd: D = -(0.6 + 0.2) < 0, trend flips the sign to -1,
    # decisions ds = b * (+1), rewards A*ds*(-1) pay the contrarians
    s = make_state([1.0, 1.0], [-0.6, -0.2], last_dO=1.0)
    out = step_feedback_binary(s, BINARY)
    assert out.sign_dO == -1
    assert np.allclose(s.wealth, [1.6, 1.2])


def test_binary_sign_recursion_pure_case():
    # sign(dO_t) = sign(dO_{t-1}) * sign(D) step by step
    s = make_state([1.0, 2.0], [0.5, -0.5], last_dO=1.0)
    signs = []
    for _ in range(6):
        d_sign = sign0(float(s.wealth @ s.b), float(np.abs(s.wealth) @ np.abs(s.b)))
        prev = s.last_sign
        out = step_feedback_binary(s, BINARY)
        assert out.sign_dO == prev * d_sign
        signs.append(out.sign_dO)
    assert set(signs) <= {-1, 1}


def test_binary_rewards_formula_matches_pre_wealth():
    s = make_state([2.0, 3.0], [0.4, 0.1], last_dO=1.0)
    pre = s.wealth.copy()
    out = step_feedback_binary(s, BINARY)
    ds = s.b * 1.0  # signal sign(+1), no force, no noise
    assert np.allclose(out.rewards, pre * ds * out.sign_dO)
    assert np.allclose(s.wealth, pre + out.rewards)


def test_binary_persistent_trend_mode():
    regime = RewardRegime(kind="feedback-binary", trend_mode="persistent")
    s = make_state([1.0, 2.0], [-0.5, -0.5], last_dO=1.0)
    for _ in range(4):
        out = step_feedback_binary(s, regime)
        assert out.sign_dO == 1  # held, even though D < 0
    assert np.allclose(s.wealth, [1.0 * 0.5**4, 2.0 * 0.5**4])


def test_binary_persistent_growth_is_closed_form():
    b = np.array([0.5, 0.25, -0.25])
    s = make_state([1.0, 1.0, 1.0], b, last_dO=1.0)
    regime = RewardRegime(kind="feedback-binary", trend_mode="persistent")
    n = 9
    for _ in range(n):
        step_feedback_binary(s, regime)
    assert np.allclose(s.wealth, (1.0 + b) ** n, rtol=1e-12)


def test_binary_floor_applies_after_reward():
    # persistent +1 trend against contrarian agents: both drop to 0.5,
    # then the floor catches them
    regime = RewardRegime(kind="feedback-binary", floor=0.8, trend_mode="persistent")
    s = make_state([1.0, 1.0], [-0.5, -0.5], last_dO=1.0, last_sign=1)
    step_feedback_binary(s, regime)
    assert np.allclose(s.wealth, [0.8, 0.8])


def test_binary_normalize_each_step():
    regime = RewardRegime(kind="feedback-binary", normalize_each_step=True)
    s = make_state([1.0, 3.0], [0.5, 0.25], last_dO=1.0)
    step_feedback_binary(s, regime)
    assert s.wealth.sum() == pytest.approx(1.0, abs=1e-12)


def test_binary_rejects_wrong_kind_and_large_b():
    s = make_state([1.0], [0.5])
    with pytest.raises(InvalidInputError):
        step_feedback_binary(s, RewardRegime(kind="feedback-continuous"))


def test_binary_noise_uses_realized_sign():
    s = make_state([1.0, 1.0], [0.0, 0.0], noise_sigma=np.array([0.5, 0.5]))
    rng = np.random.default_rng(3)
    out = step_feedback_binary(s, BINARY, rng=rng)
    assert out.sign_dO in (-1, 1)
    assert np.isfinite(out.dO)


def test_continuous_step_unclamped():
    # |ds| may exceed 1: last_dO = 4, b = 0.5 -> ds = 2
    s = make_state([1.0], [0.5], last_dO=4.0)
    regime = RewardRegime(kind="feedback-continuous")
    out = step_feedback_continuous(s, regime)
    assert out.dO == pytest.approx(2.0)
    assert np.allclose(s.wealth, [3.0])  # 1 + 1*2*sign(+)
    with pytest.raises(InvalidInputError):
        step_feedback_continuous(s, BINARY)


def test_additive_step_can_go_negative():
    regime = RewardRegime(kind="additive-random", shock_scale=5.0)
    s = make_state(np.full(256, 0.1), np.zeros(256))
    rng = np.random.default_rng(0)
    step_additive_random(s, regime, rng)
    assert np.any(s.wealth < 0.0)  # no clipping without a floor
    with pytest.raises(InvalidInputError):
        step_additive_random(s, BINARY, rng)


def test_additive_step_with_floor():
    regime = RewardRegime(kind="additive-random", shock_scale=5.0, floor=0.05)
    s = make_state(np.full(256, 0.1), np.zeros(256))
    rng = np.random.default_rng(0)
    for _ in range(10):
        step_additive_random(s, regime, rng)
    assert np.all(s.wealth >= 0.05)


def test_multiplicative_step_stays_positive():
    # shock_scale 5 would push many factors below zero without resampling
    regime = RewardRegime(kind="multiplicative-random", shock_scale=5.0)
    s = make_state(np.full(512, 1.0), np.zeros(512))
    rng = np.random.default_rng(1)
    for _ in range(5):
        step_multiplicative_random(s, regime, rng)
    assert np.all(s.wealth > 0.0)


def test_multiplicative_step_requires_positive_wealth():
    regime = RewardRegime(kind="multiplicative-random", shock_scale=0.1)
    s = make_state([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        step_multiplicative_random(s, regime, np.random.default_rng(0))


def test_multiplicative_preserves_order_statistics():
    # same shock draw order regardless of wealth, so a pure rescale of the
    # start rescales the whole trajectory
    regime = RewardRegime(kind="multiplicative-random", shock_scale=0.1)
    w0 = np.linspace(1.0, 2.0, 50)
    a = make_state(w0, np.zeros(50))
    b = make_state(w0 * 10.0, np.zeros(50))
    for seed_state in (a, b):
        rng = np.random.default_rng(77)
        for _ in range(20):
            step_multiplicative_random(seed_state, regime, rng)
    assert np.allclose(b.wealth, a.wealth * 10.0, rtol=1e-12)
