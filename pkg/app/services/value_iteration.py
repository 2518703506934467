"""
유한 MDP 정확해 (가치 반복 오라클)
"""
from typing import Optional
import logging
import numpy as np

from app.core.config import settings
from app.core.exceptions import ContractViolation, ConvergenceError
from app.dto.envs import TabularMDP

logger = logging.getLogger(__name__)


def bellman_backup(mdp: TabularMDP, q: np.ndarray) -> np.ndarray:
    """(T Q)(s,a) = R(s,a) + γ Σ_s' P(s'|s,a) max_b Q(s',b), 종료 상태의 가치는 0"""
    v = np.where(mdp.terminal, 0.0, q.max(axis=1))
    backed = mdp.reward + mdp.gamma * (mdp.transition @ v)
    backed[mdp.terminal] = 0.0
    return backed


def bellman_residual(mdp: TabularMDP, q: np.ndarray) -> float:
    """sup-norm Bellman 잔차 ‖T Q − Q‖∞"""
    return float(np.max(np.abs(bellman_backup(mdp, q) - q)))


def value_iteration(
    mdp: TabularMDP,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """
    가치 반복으로 Q* 계산

    Args:
        mdp: 유한 MDP (γ < 1)
        tolerance: 반환 테이블의 Bellman 잔차 상한 (기본 settings.VALUE_ITERATION_TOLERANCE)
        max_iterations: 반복 상한

    Returns:
        Q* 테이블 (S, A)
    """
    tolerance = settings.VALUE_ITERATION_TOLERANCE if tolerance is None else tolerance
    max_iterations = settings.VALUE_ITERATION_MAX_ITERATIONS if max_iterations is None else max_iterations
    if not mdp.gamma < 1.0:
        raise ContractViolation(f"가치 반복은 γ < 1 에서만 수렴합니다: γ={mdp.gamma}")
    if tolerance <= 0.0:
        raise ContractViolation(f"tolerance는 양수여야 합니다: {tolerance}")

    q = np.zeros((mdp.n_states, mdp.n_actions))
    for iteration in range(1, max_iterations + 1):
        q_next = bellman_backup(mdp, q)
        change = float(np.max(np.abs(q_next - q)))
        q = q_next
        # ‖T Q_next − Q_next‖∞ ≤ γ‖Q_next − Q‖∞
        if mdp.gamma * change <= tolerance:
            logger.debug(f"가치 반복 수렴: {iteration}회")
            return q

    raise ConvergenceError(f"가치 반복이 {max_iterations}회 내에 수렴하지 않았습니다.")


def greedy_policy(q: np.ndarray) -> np.ndarray:
    """상태별 argmax 행동 (동률은 낮은 인덱스)"""
    return np.argmax(np.asarray(q), axis=1)
