"""
ε-greedy 행동 선택과 ε 스케줄
"""
from typing import Any, Tuple
import numpy as np

from app.agent.networks import BaseQNetwork
from app.core.exceptions import ContractViolation
from app.dto.qcore import HindsightConfig


def epsilon_at(config: HindsightConfig, frame: int) -> float:
    """epsilon_start → epsilon_end 선형 감소 (decay 이후 상수)"""
    if frame < 0:
        raise ContractViolation(f"frame은 0 이상이어야 합니다: {frame}")
    if config.epsilon_decay_steps == 0 or frame >= config.epsilon_decay_steps:
        return config.epsilon_end
    fraction = frame / config.epsilon_decay_steps
    return config.epsilon_start + fraction * (config.epsilon_end - config.epsilon_start)


def select_action(
    network: BaseQNetwork,
    params: Any,
    state: np.ndarray,
    epsilon: float,
    rng: np.random.Generator,
) -> Tuple[int, float]:
    """
    ε-greedy 행동 선택

    Args:
        network: Q-네트워크
        params: 온라인 파라미터 θ_i
        state: 관측 벡터
        epsilon: 탐험 확률
        rng: 행동 선택용 생성기 (ε와 무관하게 매번 한 번 추출)

    Returns:
        (행동, 그 행동의 Q(s, a; θ_i))
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"epsilon은 [0, 1] 범위여야 합니다: {epsilon}")
    q = network.q_values(params, state)
    if rng.random() < epsilon:
        action = int(rng.integers(q.shape[0]))
    else:
        action = int(np.argmax(q))
    return action, float(q[action])
