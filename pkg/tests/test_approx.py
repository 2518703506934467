"""
함수 근사기 테스트 (다항식 회귀, MLP 순전파/역전파, 듀얼링 집계)
"""
import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from app.agent.networks import (
    DuelingQNetwork,
    MLPQNetwork,
    build_network,
    dueling_aggregate,
    mlp_backward,
    mlp_forward,
)
from app.agent.params import DuelingHead, ParamVector, init_params
from app.core.exceptions import ContractViolation, RankDeficientError
from app.dto.approx import MLPSpec, PolyRegressor
from app.services.poly_service import poly_eval, poly_fit, sum_squared_residuals


def _finite_difference(f, values: np.ndarray, h: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(values)
    for i in range(values.size):
        orig = values[i]
        values[i] = orig + h
        up = f()
        values[i] = orig - h
        down = f()
        values[i] = orig
        grad[i] = (up - down) / (2.0 * h)
    return grad


class TestPolyFit:
    def test_constant_fit_of_constant_data(self):
        model = poly_fit([(0, 3), (1, 3), (2, 3)], 0)
        np.testing.assert_allclose(model.coefficients, [3.0], atol=1e-12)

    def test_interpolation_has_zero_residual(self):
        samples = [(s, s ** 2) for s in (-3, -2, -1, 0, 1, 2, 3)]
        model = poly_fit(samples, 6)
        for s, target in samples:
            assert poly_eval(model, s) == pytest.approx(target, abs=1e-9)

    def test_matches_independent_least_squares(self):
        states = np.arange(-5, 6, dtype=np.float64)
        samples = list(zip(states, np.sin(states)))
        model = poly_fit(samples, 6)
        oracle = P.polyfit(states, np.sin(states), 6)
        np.testing.assert_allclose(model.coefficients, oracle, rtol=1e-8, atol=1e-8)

    def test_perturbing_coefficients_never_improves(self):
        states = np.arange(-6, 7, dtype=np.float64)
        samples = list(zip(states, 2.0 * np.exp(-states ** 2)))
        model = poly_fit(samples, 6)
        best = sum_squared_residuals(model, samples)
        for k in range(model.degree + 1):
            for step in (-1e-3, 1e-3):
                coef = list(model.coefficients)
                coef[k] += step
                perturbed = PolyRegressor(degree=model.degree, coefficients=coef)
                assert sum_squared_residuals(perturbed, samples) >= best

    def test_rank_deficiency(self):
        with pytest.raises(RankDeficientError):
            poly_fit([(0, 1), (0, 2), (1, 3)], 2)

    def test_empty_samples(self):
        with pytest.raises(ContractViolation):
            poly_fit([], 1)

    def test_coefficient_length_invariant(self):
        with pytest.raises(ValueError):
            PolyRegressor(degree=2, coefficients=[1.0, 2.0])


class TestPolyEval:
    @pytest.mark.parametrize("coefficients, state, expected", [
        ([1, 2], 3, 7),
        ([4, -1, 2.5], 0, 4),
        ([0, 0, 1], -2, 4),
    ])
    def test_examples(self, coefficients, state, expected):
        model = PolyRegressor(degree=len(coefficients) - 1, coefficients=coefficients)
        assert poly_eval(model, state) == expected

    def test_array_input(self):
        model = PolyRegressor(degree=1, coefficients=[1, 1])
        np.testing.assert_array_equal(poly_eval(model, np.array([0.0, 1.0, 2.0])), [1.0, 2.0, 3.0])


class TestMLPForward:
    def test_zero_params_give_zero_output(self):
        spec = MLPSpec(layer_widths=[3, 4, 2], activations=["identity"])
        out = mlp_forward(spec, ParamVector(spec), [1.0, -2.0, 0.5])
        np.testing.assert_array_equal(out, [0.0, 0.0])

    def test_identity_layer(self):
        spec = MLPSpec(layer_widths=[3, 3])
        params = ParamVector(spec)
        params.layer_views(0)[0][:] = np.eye(3)
        np.testing.assert_array_equal(mlp_forward(spec, params, [1.0, -1.0, 2.0]), [1.0, -1.0, 2.0])

    def test_matches_hand_rolled_matrix_arithmetic(self, rng):
        spec = MLPSpec(layer_widths=[2, 4, 3], activations=["tanh"])
        params = init_params(spec, rng)
        x = np.array([1.0, -1.0])
        w1 = params.values[:12].reshape(4, 3)
        w2 = params.values[12:].reshape(3, 5)
        hidden = np.tanh(w1[:, :2] @ x + w1[:, 2])
        expected = w2[:, :4] @ hidden + w2[:, 4]
        np.testing.assert_allclose(mlp_forward(spec, params, x), expected, rtol=0, atol=1e-12)

    def test_deterministic(self, rng):
        spec = MLPSpec(layer_widths=[3, 5, 2], activations=["relu"])
        params = init_params(spec, rng)
        x = rng.normal(size=3)
        assert np.array_equal(mlp_forward(spec, params, x), mlp_forward(spec, params, x))

    def test_width_mismatch(self):
        spec = MLPSpec(layer_widths=[3, 2])
        with pytest.raises(ContractViolation):
            mlp_forward(spec, ParamVector(spec), [1.0, 2.0])


class TestMLPBackward:
    def test_zero_output_grad(self, rng):
        spec = MLPSpec(layer_widths=[2, 4, 3], activations=["tanh"])
        params = init_params(spec, rng)
        grad = mlp_backward(spec, params, [0.3, -0.7], [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(grad.values, np.zeros(spec.param_count))

    def test_single_layer_unit_grad(self, rng):
        spec = MLPSpec(layer_widths=[3, 2])
        params = init_params(spec, rng)
        x = np.array([0.5, -1.5, 2.0])
        grad = mlp_backward(spec, params, x, [0.0, 1.0])
        w_grad, b_grad = grad.layer_views(0)
        np.testing.assert_array_equal(w_grad[1], x)
        np.testing.assert_array_equal(w_grad[0], np.zeros(3))
        np.testing.assert_array_equal(b_grad, [0.0, 1.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        widths = [int(rng.integers(1, 5)) for _ in range(int(rng.integers(2, 5)))]
        spec = MLPSpec(layer_widths=widths, activations=["tanh"] * (len(widths) - 2))
        params = init_params(spec, rng)
        x = rng.normal(size=spec.input_width)
        g = rng.normal(size=spec.output_width)

        analytic = mlp_backward(spec, params, x, g).values
        numeric = _finite_difference(lambda: float(mlp_forward(spec, params, x) @ g), params.values)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)

    def test_shape_mismatch(self, rng):
        spec = MLPSpec(layer_widths=[2, 3])
        with pytest.raises(ContractViolation):
            mlp_backward(spec, init_params(spec, rng), [1.0, 2.0], [1.0, 2.0])


class TestDueling:
    @pytest.mark.parametrize("advantages, value, expected", [
        ([3.0, 3.0, 3.0], 2.0, [2.0, 2.0, 2.0]),
        ([1.0, -1.0], 0.0, [1.0, -1.0]),
        ([2.0, 0.0, 1.0], 5.0, [6.0, 4.0, 5.0]),
    ])
    def test_examples(self, advantages, value, expected):
        np.testing.assert_allclose(dueling_aggregate(advantages, value), expected)

    def test_invariant_to_advantage_shift(self, rng):
        adv = rng.normal(size=6)
        np.testing.assert_allclose(dueling_aggregate(adv + 4.2, 1.0), dueling_aggregate(adv, 1.0), atol=1e-12)

    def test_empty_advantages(self):
        with pytest.raises(ContractViolation):
            dueling_aggregate([], 1.0)

    def test_head_widths(self, rng):
        shared = init_params(MLPSpec(layer_widths=[3, 4]), rng)
        advantage = init_params(MLPSpec(layer_widths=[4, 2]), rng)
        with pytest.raises(ContractViolation):
            DuelingHead(shared, advantage, init_params(MLPSpec(layer_widths=[4, 2]), rng))

    def test_network_gradient(self, rng):
        network = DuelingQNetwork(
            MLPSpec(layer_widths=[3, 4], output_activation="tanh"), n_actions=3
        )
        params = network.init_params(rng)
        states = rng.normal(size=(2, 3))
        q_grad = rng.normal(size=(2, 3))
        _, cache = network.forward(params, states)
        analytic = network.backward(params, cache, q_grad)

        for mine, theirs in zip(params.parts, analytic.parts):
            def objective():
                q, _ = network.forward(params, states)
                return float(np.sum(q * q_grad))
            numeric = _finite_difference(objective, mine.values)
            np.testing.assert_allclose(theirs.values, numeric, rtol=1e-5, atol=1e-8)


class TestParamVector:
    def test_layout_is_bijective(self):
        spec = MLPSpec(layer_widths=[3, 4, 2], activations=["relu"])
        params = ParamVector(spec)
        seen = set()
        for layer in range(spec.n_layers):
            for row in range(spec.layer_widths[layer + 1]):
                for col in range(spec.layer_widths[layer] + 1):
                    flat = params.index(layer, row, col)
                    assert params.position(flat) == (layer, row, col)
                    seen.add(flat)
        assert seen == set(range(spec.param_count))

    def test_init_bounds(self, rng):
        spec = MLPSpec(layer_widths=[16, 4])
        params = init_params(spec, rng)
        assert np.all(np.abs(params.values) <= 0.25)

    def test_load_from_layout_mismatch(self):
        a = ParamVector(MLPSpec(layer_widths=[2, 3]))
        b = ParamVector(MLPSpec(layer_widths=[3, 2]))
        with pytest.raises(ContractViolation):
            a.load_from(b)


def test_build_network_variants():
    assert isinstance(build_network("dqn", 5, 2, []), MLPQNetwork)
    duel = build_network("duel", 5, 2, [8], "tanh")
    assert isinstance(duel, DuelingQNetwork)
    assert duel.n_actions == 2 and duel.obs_dim == 5
