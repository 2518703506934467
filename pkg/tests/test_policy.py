"""
ε-greedy 행동 선택, ε 스케줄 테스트
"""
import numpy as np
import pytest

from app.agent.networks import MLPQNetwork
from app.agent.policy import epsilon_at, select_action
from app.core.exceptions import ContractViolation
from app.dto.qcore import HindsightConfig
from tests.conftest import constant_net


class TestSelectAction:
    def test_greedy(self, rng):
        spec, params = constant_net([1.0, 5.0, 3.0])
        assert select_action(MLPQNetwork(spec), params, np.zeros(1), 0.0, rng) == (1, 5.0)

    def test_ties_go_to_lowest_index(self, rng):
        spec, params = constant_net([2.0, 2.0])
        assert select_action(MLPQNetwork(spec), params, np.zeros(1), 0.0, rng) == (0, 2.0)

    def test_returned_q_matches_action(self, rng):
        spec, params = constant_net([0.5, -1.0, 4.0, 2.0])
        network = MLPQNetwork(spec)
        for _ in range(100):
            action, q = select_action(network, params, np.zeros(1), 0.5, rng)
            assert q == [0.5, -1.0, 4.0, 2.0][action]

    def test_draws_once_when_greedy(self):
        spec, params = constant_net([1.0, 0.0])
        a, b = np.random.default_rng(3), np.random.default_rng(3)
        select_action(MLPQNetwork(spec), params, np.zeros(1), 0.0, a)
        b.random()
        assert a.random() == b.random()

    def test_invalid_epsilon(self, rng):
        spec, params = constant_net([1.0])
        with pytest.raises(ContractViolation):
            select_action(MLPQNetwork(spec), params, np.zeros(1), 1.5, rng)

    @pytest.mark.slow
    def test_full_exploration_is_uniform(self):
        spec, params = constant_net([0.0, 9.0, 1.0, 2.0])
        network = MLPQNetwork(spec)
        rng = np.random.default_rng(0)
        n = 1_000_000
        counts = np.zeros(4)
        state = np.zeros(1)
        for _ in range(n):
            counts[select_action(network, params, state, 1.0, rng)[0]] += 1
        assert np.all(np.abs(counts / n - 0.25) < 0.005)


class TestEpsilonSchedule:
    def test_endpoints(self):
        config = HindsightConfig(epsilon_start=1.0, epsilon_end=0.1, epsilon_decay_steps=100)
        assert epsilon_at(config, 0) == 1.0
        assert epsilon_at(config, 50) == pytest.approx(0.55)
        assert epsilon_at(config, 100) == 0.1
        assert epsilon_at(config, 10_000) == 0.1

    def test_no_decay(self):
        config = HindsightConfig(epsilon_start=1.0, epsilon_end=0.05, epsilon_decay_steps=0)
        assert epsilon_at(config, 0) == 0.05

    def test_monotone(self):
        config = HindsightConfig(epsilon_start=0.9, epsilon_end=0.02, epsilon_decay_steps=37)
        values = [epsilon_at(config, f) for f in range(60)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_negative_frame(self):
        with pytest.raises(ContractViolation):
            epsilon_at(HindsightConfig(), -1)
