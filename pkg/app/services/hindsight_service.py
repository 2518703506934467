"""
hindsight 손실, 타깃 계산, 파라미터/테이블 갱신 규칙
"""
from typing import Any
import logging
import numpy as np

from app.agent.networks import BaseQNetwork
from app.core.exceptions import ContractViolation, DivergenceError
from app.dto.qcore import HindsightConfig, Transition, TransitionBatch

logger = logging.getLogger(__name__)


def _check_delta(delta: float) -> None:
    if not np.all(np.asarray(delta) > -1.0):
        raise ContractViolation(f"delta는 −1보다 커야 합니다: {delta}")


# ===== 타깃 =====

def dqn_targets(network: BaseQNetwork, target_params: Any, batch: TransitionBatch, gamma: float) -> np.ndarray:
    """ŷ = r (종료) 또는 r + γ·max_a' Q_target(s', a'; θ⁻)"""
    q_next, _ = network.forward(target_params, batch.next_states)
    bootstrap = batch.rewards + gamma * q_next.max(axis=1)
    return np.where(batch.terminals, batch.rewards, bootstrap)


def ddqn_targets(
    network: BaseQNetwork,
    online_params: Any,
    target_params: Any,
    batch: TransitionBatch,
    gamma: float,
) -> np.ndarray:
    """a* = argmax_a' Q(s', a'; θ) (온라인), ŷ = r + γ·Q_target(s', a*; θ⁻)"""
    q_online, _ = network.forward(online_params, batch.next_states)
    q_target, _ = network.forward(target_params, batch.next_states)
    best = np.argmax(q_online, axis=1)
    bootstrap = batch.rewards + gamma * q_target[np.arange(len(batch)), best]
    return np.where(batch.terminals, batch.rewards, bootstrap)


def dqn_target(t: Transition, network: BaseQNetwork, target_params: Any, gamma: float) -> float:
    return float(dqn_targets(network, target_params, TransitionBatch.from_transitions([t]), gamma)[0])


def ddqn_target(
    t: Transition,
    network: BaseQNetwork,
    online_params: Any,
    target_params: Any,
    gamma: float,
) -> float:
    batch = TransitionBatch.from_transitions([t])
    return float(ddqn_targets(network, online_params, target_params, batch, gamma)[0])


# ===== 손실 =====

def smoothed_reward(y_hat, y_bar, delta: float):
    """r_new = (ŷ + δ·ȳ) / (1 + δ)"""
    _check_delta(delta)
    return (y_hat + delta * y_bar) / (1.0 + delta)


def hindsight_loss(q, y_hat, y_bar, delta: float):
    """(ŷ − q)² + δ·(ȳ − q)²"""
    _check_delta(delta)
    return (y_hat - q) ** 2 + delta * (y_bar - q) ** 2


def hindsight_loss_grad_q(q, y_hat, y_bar, delta: float):
    """∂L/∂q = 2(1+δ)(q − r_new)"""
    r_new = smoothed_reward(y_hat, y_bar, delta)
    return 2.0 * (1.0 + delta) * (q - r_new)


# ===== 파라미터 갱신 =====

def sgd_update_batch(
    network: BaseQNetwork,
    params: Any,
    batch: TransitionBatch,
    y_hat: np.ndarray,
    config: HindsightConfig,
    hindsight: bool = True,
) -> np.ndarray:
    """
    θ ← θ + step·mean_j (target_j − Q(s_j, a_j; θ)) ∇_θ Q(s_j, a_j; θ)

    - hindsight: target = r_new (ȳ = 저장된 behavior_q), step = α
    - hindsight 없음: target = ŷ, step = α
    - lr_half_mode: target = ŷ, step = α/(1+δ)

    params는 제자리에서 갱신된다. 갱신 전 Q(s_j, a_j; θ)를 반환.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if not np.all(np.isfinite(y_hat)):
        raise DivergenceError("타깃 ŷ에 유한하지 않은 값이 있습니다.")

    n = len(batch)
    rows = np.arange(n)
    q_all, cache = network.forward(params, batch.states)
    q = q_all[rows, batch.actions]

    if config.lr_half_mode:
        residual = y_hat - q
        step = config.alpha / (1.0 + config.delta)
    elif hindsight:
        residual = smoothed_reward(y_hat, batch.behavior_q, config.delta) - q
        step = config.alpha
    else:
        residual = y_hat - q
        step = config.alpha

    q_grad = np.zeros_like(q_all)
    q_grad[rows, batch.actions] = residual / n
    grad = network.backward(params, cache, q_grad)
    if not grad.all_finite():
        raise DivergenceError("그래디언트에 유한하지 않은 값이 있습니다.")

    params.add_scaled(step, grad)
    return q


def sgd_update(
    network: BaseQNetwork,
    params: Any,
    t: Transition,
    y_hat: float,
    config: HindsightConfig,
    hindsight: bool = True,
) -> Any:
    """단일 전이 갱신 (θ_{i+1} = θ_i + α(r_new − Q)∇Q)"""
    batch = TransitionBatch.from_transitions([t])
    sgd_update_batch(network, params, batch, np.array([y_hat]), config, hindsight=hindsight)
    return params


# ===== 테이블 갱신 =====

def _bootstrap_target(q_table: np.ndarray, s_next: int, r: float, gamma: float, terminal: bool) -> float:
    if terminal:
        return r
    return r + gamma * float(np.max(q_table[s_next]))


def watkins_update(
    q_table: np.ndarray,
    s: int,
    a: int,
    s_next: int,
    r: float,
    config: HindsightConfig,
    terminal: bool = False,
) -> np.ndarray:
    """Q(s,a) ← (1−α)Q(s,a) + α(r + γ max_b Q(s',b))"""
    table = np.array(q_table, dtype=np.float64, copy=True)
    target = _bootstrap_target(table, s_next, r, config.gamma, terminal)
    alpha = config.alpha
    table[s, a] = (1.0 - alpha) * table[s, a] + alpha * target
    return table


def tabular_update(
    q_table: np.ndarray,
    s: int,
    a: int,
    s_next: int,
    r: float,
    behavior_q: float,
    config: HindsightConfig,
    terminal: bool = False,
) -> np.ndarray:
    """
    Q(s,a) ← (1−α)Q(s,a) + (α/(1+δ))(r + γ max_b Q(s',b) + δ·Q_j(s,a))

    δ = 0이면 watkins_update와 비트 단위로 같다.
    """
    table = np.array(q_table, dtype=np.float64, copy=True)
    if not (0 <= s < table.shape[0] and 0 <= a < table.shape[1] and 0 <= s_next < table.shape[0]):
        raise ContractViolation(f"테이블 인덱스 범위 초과: s={s}, a={a}, s'={s_next}")
    target = _bootstrap_target(table, s_next, r, config.gamma, terminal)
    alpha, delta = config.alpha, config.delta
    table[s, a] = (1.0 - alpha) * table[s, a] + (alpha / (1.0 + delta)) * (target + delta * behavior_q)
    return table
