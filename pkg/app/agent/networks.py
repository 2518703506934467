"""
Q-네트워크 (완전 연결 MLP, 수동 역전파, 듀얼링 집계)
"""
from abc import ABC, abstractmethod
from typing import Any, List, Sequence, Tuple
import logging
import numpy as np

from app.agent.params import DuelingHead, ParamVector, init_params
from app.core.exceptions import ContractViolation
from app.dto.approx import Activation, MLPSpec

logger = logging.getLogger(__name__)


def _activate(z: np.ndarray, kind: Activation) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(z: np.ndarray, a: np.ndarray, kind: Activation) -> np.ndarray:
    """활성화 미분 (z: 사전 활성값, a: 활성값)"""
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


# 순전파 캐시: 레이어별 (입력, 사전 활성값, 출력)
ForwardCache = List[Tuple[np.ndarray, np.ndarray, np.ndarray]]


def mlp_forward_batch(spec: MLPSpec, params: ParamVector, inputs: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    배치 순전파

    Args:
        inputs: (B, in) 입력 행렬

    Returns:
        (출력 (B, out), 역전파용 캐시)
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_width:
        raise ContractViolation(f"입력 폭 불일치: 기대={spec.input_width}, 입력 형상={x.shape}")

    cache: ForwardCache = []
    for layer in range(spec.n_layers):
        w, b = params.layer_views(layer)
        z = x @ w.T + b
        a = _activate(z, spec.layer_activation(layer))
        cache.append((x, z, a))
        x = a
    return x, cache


def mlp_backward_batch(
    spec: MLPSpec,
    params: ParamVector,
    cache: ForwardCache,
    output_grad: np.ndarray,
) -> Tuple[ParamVector, np.ndarray]:
    """
    배치 역전파: Σ_b ⟨output_b, output_grad_b⟩ 의 그래디언트

    Returns:
        (파라미터 그래디언트, 입력 그래디언트 (B, in))
    """
    g = np.asarray(output_grad, dtype=np.float64)
    last_out = cache[-1][2]
    if g.shape != last_out.shape:
        raise ContractViolation(f"output_grad 형상 불일치: 기대={last_out.shape}, 입력={g.shape}")

    grad = params.zeros_like()
    for layer in reversed(range(spec.n_layers)):
        x, z, a = cache[layer]
        delta = g * _activation_grad(z, a, spec.layer_activation(layer))
        blk = grad.block(layer)
        blk[:, :-1] = delta.T @ x
        blk[:, -1] = delta.sum(axis=0)
        w, _ = params.layer_views(layer)
        g = delta @ w
    return grad, g


def mlp_forward(spec: MLPSpec, params: ParamVector, input: Sequence[float]) -> np.ndarray:
    """단일 입력 순전파 (최종 레이어 활성값)"""
    x = np.asarray(input, dtype=np.float64)
    if x.ndim != 1:
        raise ContractViolation(f"입력은 1차원이어야 합니다: {x.shape}")
    out, _ = mlp_forward_batch(spec, params, x[None, :])
    return out[0]


def mlp_backward(
    spec: MLPSpec,
    params: ParamVector,
    input: Sequence[float],
    output_grad: Sequence[float],
) -> ParamVector:
    """단일 입력 역전파: ⟨output, output_grad⟩ 의 파라미터 그래디언트"""
    x = np.asarray(input, dtype=np.float64)
    g = np.asarray(output_grad, dtype=np.float64)
    if x.ndim != 1 or g.ndim != 1:
        raise ContractViolation("input과 output_grad는 1차원이어야 합니다.")
    _, cache = mlp_forward_batch(spec, params, x[None, :])
    grad, _ = mlp_backward_batch(spec, params, cache, g[None, :])
    return grad


def dueling_aggregate(advantages: Sequence[float] | np.ndarray, state_value: float | np.ndarray) -> np.ndarray:
    """
    q[a] = Adv[a] − mean(Adv) + V

    advantages가 (B, A)이면 state_value는 (B,) 또는 (B, 1).
    """
    adv = np.asarray(advantages, dtype=np.float64)
    if adv.size == 0 or adv.shape[-1] == 0:
        raise ContractViolation("advantage 시퀀스가 비어 있습니다.")
    value = np.asarray(state_value, dtype=np.float64)
    if adv.ndim == 2 and value.ndim == 1:
        value = value[:, None]
    return adv - adv.mean(axis=-1, keepdims=True) + value


class BaseQNetwork(ABC):
    """Q(s,·;θ) 근사기 기본 클래스"""

    n_actions: int
    obs_dim: int

    @abstractmethod
    def init_params(self, rng: np.random.Generator) -> Any:
        """시드 고정 초기화"""
        pass

    @abstractmethod
    def forward(self, params: Any, states: np.ndarray) -> Tuple[np.ndarray, Any]:
        """(Q (B, A), 캐시)"""
        pass

    @abstractmethod
    def backward(self, params: Any, cache: Any, q_grad: np.ndarray) -> Any:
        """Σ_b ⟨Q_b, q_grad_b⟩ 의 파라미터 그래디언트"""
        pass

    def q_values(self, params: Any, state: np.ndarray) -> np.ndarray:
        """단일 상태의 행동 가치 벡터"""
        q, _ = self.forward(params, np.asarray(state, dtype=np.float64)[None, :])
        return q[0]


class MLPQNetwork(BaseQNetwork):
    """일반 MLP Q-헤드 (DQN / DDQN)"""

    def __init__(self, spec: MLPSpec):
        self.spec = spec
        self.obs_dim = spec.input_width
        self.n_actions = spec.output_width

    def init_params(self, rng: np.random.Generator) -> ParamVector:
        return init_params(self.spec, rng)

    def forward(self, params: ParamVector, states: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        return mlp_forward_batch(self.spec, params, states)

    def backward(self, params: ParamVector, cache: ForwardCache, q_grad: np.ndarray) -> ParamVector:
        grad, _ = mlp_backward_batch(self.spec, params, cache, q_grad)
        return grad


class DuelingQNetwork(BaseQNetwork):
    """듀얼링 Q-헤드: 공유 trunk → (advantage, value) → 평균 중심화 집계"""

    def __init__(self, shared_spec: MLPSpec, n_actions: int):
        feature_width = shared_spec.output_width
        self.shared_spec = shared_spec
        self.advantage_spec = MLPSpec(layer_widths=[feature_width, n_actions])
        self.value_spec = MLPSpec(layer_widths=[feature_width, 1])
        self.obs_dim = shared_spec.input_width
        self.n_actions = n_actions

    def init_params(self, rng: np.random.Generator) -> DuelingHead:
        return DuelingHead(
            init_params(self.shared_spec, rng),
            init_params(self.advantage_spec, rng),
            init_params(self.value_spec, rng),
        )

    def forward(self, params: DuelingHead, states: np.ndarray):
        features, shared_cache = mlp_forward_batch(self.shared_spec, params.shared_params, states)
        adv, adv_cache = mlp_forward_batch(self.advantage_spec, params.advantage_params, features)
        value, value_cache = mlp_forward_batch(self.value_spec, params.value_params, features)
        q = dueling_aggregate(adv, value)
        return q, (shared_cache, adv_cache, value_cache)

    def backward(self, params: DuelingHead, cache, q_grad: np.ndarray) -> DuelingHead:
        shared_cache, adv_cache, value_cache = cache
        g = np.asarray(q_grad, dtype=np.float64)
        # ∂Q_a/∂Adv_j = 1[a=j] − 1/|A|,  ∂Q_a/∂V = 1
        adv_grad = g - g.mean(axis=1, keepdims=True)
        value_grad = g.sum(axis=1, keepdims=True)
        d_adv, feat_from_adv = mlp_backward_batch(self.advantage_spec, params.advantage_params, adv_cache, adv_grad)
        d_value, feat_from_value = mlp_backward_batch(self.value_spec, params.value_params, value_cache, value_grad)
        d_shared, _ = mlp_backward_batch(
            self.shared_spec, params.shared_params, shared_cache, feat_from_adv + feat_from_value
        )
        return DuelingHead(d_shared, d_adv, d_value)


def build_network(
    base: str,
    obs_dim: int,
    n_actions: int,
    hidden_widths: Sequence[int],
    activation: Activation = "relu",
) -> BaseQNetwork:
    """
    변형(dqn, ddqn, duel)에 맞는 Q-네트워크 생성

    duel의 공유 trunk는 hidden_widths를 따르며, 은닉층이 없으면
    입력 폭 그대로의 선형 특징을 사용한다.
    """
    hidden = list(hidden_widths)
    if base == "duel":
        if hidden:
            shared = MLPSpec(
                layer_widths=[obs_dim, *hidden],
                activations=[activation] * (len(hidden) - 1),
                output_activation=activation,
            )
        else:
            shared = MLPSpec(layer_widths=[obs_dim, obs_dim])
        logger.info(f"듀얼링 네트워크 생성: trunk={shared.layer_widths}, actions={n_actions}")
        return DuelingQNetwork(shared, n_actions)

    spec = MLPSpec(
        layer_widths=[obs_dim, *hidden, n_actions],
        activations=[activation] * len(hidden),
    )
    logger.info(f"MLP 네트워크 생성: widths={spec.layer_widths}")
    return MLPQNetwork(spec)
