"""
공용 테스트 fixture
"""
import numpy as np
import pytest

from app.agent.params import ParamVector
from app.dto.approx import MLPSpec
from app.dto.envs import EnvSpec
from app.dto.qcore import HindsightConfig
from app.services.env_service import get_env


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fast_config():
    """짧은 학습용 설정 (체인 MDP, one-hot 선형 특징)"""
    return HindsightConfig(
        delta=1.0,
        gamma=0.9,
        alpha=0.1,
        target_sync_period=50,
        epsilon_start=1.0,
        epsilon_end=0.1,
        epsilon_decay_steps=500,
        batch_size=8,
        buffer_capacity=1_000,
    )


@pytest.fixture
def chain5():
    return get_env(EnvSpec(kind="chain", n_states=5, max_episode_steps=50), gamma=0.9)


def constant_net(outputs):
    """입력과 무관하게 outputs를 내는 1-입력 선형 네트워크 (가중치 0, 편향 = outputs)"""
    outputs = np.asarray(outputs, dtype=np.float64)
    spec = MLPSpec(layer_widths=[1, outputs.size])
    params = ParamVector(spec)
    params.layer_views(0)[1][:] = outputs
    return spec, params
