"""
환경 생성/관리 서비스 (체인, 그리드월드, 함수 추정 환경)
"""
from typing import Callable, Dict, List, Tuple
import logging
import numpy as np

from app.core.exceptions import ContractViolation
from app.dto.envs import EnvSpec, FunctionEstimationEnv, TabularMDP, TrueValue
from app.services.envs import BaseEnv, TabularEnv

logger = logging.getLogger(__name__)

LEFT, RIGHT = 0, 1
# 그리드월드 행동: 위, 오른쪽, 아래, 왼쪽
GRID_MOVES: List[Tuple[int, int]] = [(-1, 0), (0, 1), (1, 0), (0, -1)]


def chain_mdp(n: int, gamma: float) -> TabularMDP:
    """
    결정적 좌/우 체인 (상태 0에서 시작, 오른쪽 끝 n−1 진입 시 보상 1로 종료)

    Args:
        n: 상태 개수 (n ≥ 2)
        gamma: 할인율

    Returns:
        TabularMDP (행동 0 = 왼쪽, 1 = 오른쪽)
    """
    if n < 2:
        raise ContractViolation(f"체인 길이는 2 이상이어야 합니다: {n}")
    transition = np.zeros((n, 2, n))
    reward = np.zeros((n, 2))
    terminal = np.zeros(n, dtype=bool)
    terminal[n - 1] = True

    for s in range(n):
        if terminal[s]:
            transition[s, :, s] = 1.0
            continue
        transition[s, LEFT, max(s - 1, 0)] = 1.0
        transition[s, RIGHT, s + 1] = 1.0
        if s + 1 == n - 1:
            reward[s, RIGHT] = 1.0

    return TabularMDP(
        n_states=n, n_actions=2, transition=transition, reward=reward,
        terminal=terminal, gamma=gamma, start_state=0,
    )


def gridworld_mdp(size: int = 4, gamma: float = 0.9) -> TabularMDP:
    """
    size×size 결정적 그리드월드 (좌상단 시작, 우하단 목표 진입 시 보상 1로 종료)

    벽으로 향하는 이동은 제자리에 머문다. 상태 번호는 row*size + col.
    """
    if size < 2:
        raise ContractViolation(f"그리드 크기는 2 이상이어야 합니다: {size}")
    n = size * size
    goal = n - 1
    transition = np.zeros((n, len(GRID_MOVES), n))
    reward = np.zeros((n, len(GRID_MOVES)))
    terminal = np.zeros(n, dtype=bool)
    terminal[goal] = True

    for s in range(n):
        if terminal[s]:
            transition[s, :, s] = 1.0
            continue
        row, col = divmod(s, size)
        for a, (dr, dc) in enumerate(GRID_MOVES):
            r2 = min(max(row + dr, 0), size - 1)
            c2 = min(max(col + dc, 0), size - 1)
            s2 = r2 * size + c2
            transition[s, a, s2] = 1.0
            if s2 == goal:
                reward[s, a] = 1.0

    return TabularMDP(
        n_states=n, n_actions=len(GRID_MOVES), transition=transition, reward=reward,
        terminal=terminal, gamma=gamma, start_state=0,
    )


# 환경 생성기 매핑
ENV_BUILDERS: Dict[str, Callable[[EnvSpec, float], TabularMDP]] = {
    "chain": lambda spec, gamma: chain_mdp(spec.n_states, gamma),
    "gridworld": lambda spec, gamma: gridworld_mdp(spec.size, gamma),
}


def build_mdp(spec: EnvSpec, gamma: float) -> TabularMDP:
    """EnvSpec에 맞는 TabularMDP 생성"""
    builder = ENV_BUILDERS.get(spec.kind)
    if builder is None:
        raise ContractViolation(f"알 수 없는 환경 타입: {spec.kind}")
    return builder(spec, gamma)


def get_env(spec: EnvSpec, gamma: float) -> BaseEnv:
    """EnvSpec에 맞는 학습 환경 반환"""
    mdp = build_mdp(spec, gamma)
    logger.info(f"환경 생성: {spec.kind} (states={mdp.n_states}, actions={mdp.n_actions})")
    return TabularEnv(mdp, name=spec.kind, max_episode_steps=spec.max_episode_steps)


# ===== 함수 추정 환경 =====

def function_estimation_env(true_value: TrueValue = "sine") -> FunctionEstimationEnv:
    """10개 행동, 정수 상태 −6..6, 행동마다 인접한 두 상태가 빠진 함수 추정 환경"""
    return FunctionEstimationEnv(true_value=true_value)


def true_value(env: FunctionEstimationEnv, state: float | np.ndarray) -> float | np.ndarray:
    """Q*(s, a) = sin(s) 또는 2·exp(−s²) (행동과 무관)"""
    s = np.asarray(state, dtype=np.float64)
    if env.true_value == "sine":
        value = np.sin(s)
    else:
        value = 2.0 * np.exp(-s ** 2)
    if value.ndim == 0:
        return float(value)
    return value


def sample_set(env: FunctionEstimationEnv, action: int) -> List[Tuple[float, float]]:
    """
    행동의 학습 샘플 (제거 쌍을 뺀 정수 상태와 그 참값)

    Args:
        env: 함수 추정 환경
        action: 행동 인덱스

    Returns:
        (state, Q*(state)) 리스트
    """
    if not 0 <= action < env.n_actions:
        raise ContractViolation(f"행동 인덱스 범위 초과: {action}")
    states = states_without(env, env.removed_pairs[action])
    return [(float(s), true_value(env, float(s))) for s in states]


def states_without(env: FunctionEstimationEnv, pair: Tuple[int, int]) -> np.ndarray:
    """제거 쌍을 뺀 정수 상태 배열"""
    removed = set(pair)
    return np.array([s for s in env.sample_states if s not in removed], dtype=np.float64)
