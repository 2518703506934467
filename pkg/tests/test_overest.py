"""
과대추정 연구 테스트 (함수 추정 라운드, 편향 곡선, 노이즈 경계)
"""
import numpy as np
import pytest

from app.core.exceptions import ContractViolation
from app.dto.approx import PolyRegressor
from app.dto.overest import NoiseModel
from app.services import overest_service
from app.services.env_service import function_estimation_env, sample_set
from app.services.overest_service import (
    bias_curve,
    derangement,
    estimate_all,
    estimate_rounds,
    lower_bound,
    mean_abs_bias,
    mean_bias,
    noise_mc,
    smoothness,
    thrun_upper_bound,
)
from app.services.poly_service import poly_eval, poly_fit


def _cubic(env, state):
    s = np.asarray(state, dtype=np.float64)
    value = 0.02 * s ** 3 - 0.1 * s ** 2 + 0.5
    return float(value) if value.ndim == 0 else value


@pytest.fixture
def sine_env():
    return function_estimation_env("sine")


class TestEstimateRounds:
    def test_round_zero_is_direct_fit(self, sine_env):
        fits = estimate_all(sine_env, "dqn", rounds=1)
        assert fits.round == 0
        for action in range(sine_env.n_actions):
            direct = poly_fit(np.array(sample_set(sine_env, action)), 6)
            np.testing.assert_allclose(fits.selector[action].coefficients, direct.coefficients, atol=1e-10)

    def test_round_indices(self, sine_env):
        rounds = list(estimate_rounds(sine_env, "ddqn", rounds=3))
        assert [r.round for r in rounds] == [0, 1, 2]
        assert all(r.is_double for r in rounds)

    def test_hindsight_delta_zero_matches_plain(self, sine_env):
        plain = estimate_all(sine_env, "dqn", rounds=5)
        hindsight = estimate_all(sine_env, "dqn_h", delta=0.0, rounds=5)
        assert plain.selector == hindsight.selector

    def test_double_uses_other_pairs(self, sine_env):
        fits = estimate_all(sine_env, "ddqn", rounds=1, seed=3)
        assert all(s != e for s, e in zip(fits.selector, fits.evaluator))

    def test_evaluator_stays_fixed(self, sine_env):
        rounds = list(estimate_rounds(sine_env, "ddqn_h", delta=1.0, rounds=4, seed=1))
        for fits in rounds[1:]:
            assert fits.evaluator == rounds[0].evaluator
        assert rounds[-1].selector != rounds[0].selector

    def test_single_estimate_ignores_seed(self, sine_env):
        a = estimate_all(sine_env, "dqn_h", delta=1.0, rounds=4, seed=0)
        b = estimate_all(sine_env, "dqn_h", delta=1.0, rounds=4, seed=7)
        assert a.selector == b.selector
        c = estimate_all(sine_env, "ddqn", rounds=4, seed=0)
        d = estimate_all(sine_env, "ddqn", rounds=4, seed=1)
        assert c.evaluator != d.evaluator

    def test_hindsight_smoother_than_double(self, sine_env):
        dqn_h = bias_curve(estimate_all(sine_env, "dqn_h", delta=1.0, rounds=5), sine_env)
        ddqn = bias_curve(estimate_all(sine_env, "ddqn", rounds=5, seed=0), sine_env)
        assert smoothness(dqn_h) < smoothness(ddqn)

    def test_unknown_method(self, sine_env):
        with pytest.raises(ContractViolation):
            list(estimate_rounds(sine_env, "sarsa"))

    def test_invalid_rounds(self, sine_env):
        with pytest.raises(ContractViolation):
            list(estimate_rounds(sine_env, "dqn", rounds=0))

    @pytest.mark.parametrize("method", ["dqn", "ddqn", "dqn_h", "ddqn_h"])
    def test_exact_fits_have_no_bias(self, monkeypatch, method):
        monkeypatch.setattr(overest_service, "true_value", _cubic)
        env = function_estimation_env("sine")
        curve = bias_curve(estimate_all(env, method, rounds=5), env)
        assert np.max(np.abs(curve.bias)) < 1e-6


class TestBiasCurve:
    def test_shift_of_one_action(self, monkeypatch):
        monkeypatch.setattr(overest_service, "true_value", _cubic)
        env = function_estimation_env("sine")
        exact = PolyRegressor(degree=3, coefficients=[0.5, 0.0, -0.1, 0.02])
        raised = PolyRegressor(degree=3, coefficients=[0.75, 0.0, -0.1, 0.02])
        assert np.max(np.abs(bias_curve([exact] * 10, env).bias)) < 1e-12

        fits = [exact] * 10
        fits[3] = raised
        np.testing.assert_allclose(bias_curve(fits, env).bias, 0.25, atol=1e-12)

    def test_requires_all_actions(self, sine_env):
        with pytest.raises(ContractViolation):
            bias_curve([PolyRegressor(degree=0, coefficients=[0.0])] * 3, sine_env)

    def test_grid(self, sine_env):
        curve = bias_curve(estimate_all(sine_env, "dqn", rounds=1), sine_env, "dqn")
        assert curve.grid.shape == (601,)
        assert curve.method_label == "dqn"

    def test_metrics(self, sine_env):
        curve = bias_curve([PolyRegressor(degree=0, coefficients=[0.0])] * 10, sine_env)
        np.testing.assert_allclose(curve.bias, -np.sin(curve.grid))
        assert mean_bias(curve) == pytest.approx(0.0, abs=1e-12)
        assert mean_abs_bias(curve) > 0.0
        assert smoothness(curve) == pytest.approx(np.std(np.diff(-np.sin(curve.grid))))

    def test_dqn_overestimates(self, sine_env):
        curve = bias_curve(estimate_all(sine_env, "dqn", rounds=10), sine_env)
        assert mean_bias(curve) > 0.0

    def test_double_estimate_is_lower(self, sine_env):
        dqn = bias_curve(estimate_all(sine_env, "dqn", rounds=10), sine_env)
        ddqn = bias_curve(estimate_all(sine_env, "ddqn", rounds=10, seed=0), sine_env)
        assert mean_bias(ddqn) < mean_bias(dqn)


@pytest.mark.slow
def test_overestimation_study_properties():
    env = function_estimation_env("sine")
    dqn_positive = h_lower_abs = h_smoother = 0
    for seed in range(5):
        dqn = bias_curve(estimate_all(env, "dqn", rounds=20, seed=seed), env)
        ddqn = bias_curve(estimate_all(env, "ddqn", rounds=20, seed=seed), env)
        dqn_h = bias_curve(estimate_all(env, "dqn_h", delta=1.0, rounds=20, seed=seed), env)
        dqn_positive += mean_bias(dqn) > 0.0
        h_lower_abs += mean_abs_bias(dqn_h) < mean_abs_bias(dqn)
        h_smoother += smoothness(dqn_h) < smoothness(ddqn)
    assert dqn_positive == 5
    assert h_lower_abs >= 4
    assert h_smoother >= 4


class TestBounds:
    def test_thrun_bound(self):
        assert thrun_upper_bound(NoiseModel(epsilon=1.0, m=10)) == pytest.approx(9 / 11)
        assert thrun_upper_bound(NoiseModel(epsilon=2.0, m=3, gamma=0.5)) == pytest.approx(0.5)
        assert thrun_upper_bound(NoiseModel(epsilon=1.0, m=1)) == 0.0

    def test_lower_bound(self):
        assert lower_bound(1.0, 2) == 1.0
        assert lower_bound(4.0, 5) == 1.0

    def test_lower_bound_domain(self):
        with pytest.raises(ContractViolation):
            lower_bound(1.0, 1)
        with pytest.raises(ContractViolation):
            lower_bound(0.0, 3)


class TestNoiseMC:
    def test_single_action_centered(self):
        estimate = noise_mc(NoiseModel(epsilon=1.0, m=1), trials=100_000, seed=0)
        assert abs(estimate.mean) <= 3 * estimate.std_error
        assert estimate.closed_form == 0.0

    def test_no_noise(self):
        estimate = noise_mc(NoiseModel(epsilon=0.0, m=5), trials=1_000, seed=0)
        assert estimate.mean == 0.0
        assert estimate.std_error == 0.0

    def test_matches_closed_form(self):
        estimate = noise_mc(NoiseModel(epsilon=1.0, m=10), trials=1_000_000, seed=0)
        assert estimate.relative_error < 0.01
        assert estimate.trials == 1_000_000

    def test_error_shrinks_with_trials(self):
        nm = NoiseModel(epsilon=1.0, m=4, gamma=0.9)
        small = noise_mc(nm, trials=1_000, seed=1)
        large = noise_mc(nm, trials=100_000, seed=1)
        assert large.std_error < small.std_error / 5
        assert abs(large.mean - large.closed_form) <= 4 * large.std_error

    def test_chunking_does_not_change_draws(self):
        nm = NoiseModel(epsilon=1.0, m=3)
        a = noise_mc(nm, trials=10_000, seed=2, chunk=10_000)
        b = noise_mc(nm, trials=10_000, seed=2, chunk=777)
        assert a.mean == pytest.approx(b.mean, rel=1e-12)

    def test_invalid_trials(self):
        with pytest.raises(ContractViolation):
            noise_mc(NoiseModel(epsilon=1.0, m=2), trials=0)


class TestDerangement:
    def test_no_fixed_points(self, rng):
        for n in range(2, 12):
            perm = derangement(n, rng)
            assert sorted(perm.tolist()) == list(range(n))
            assert not np.any(perm == np.arange(n))

    def test_too_small(self, rng):
        with pytest.raises(ContractViolation):
            derangement(1, rng)
