"""
과대추정 연구 서비스 (함수 추정 실험, 편향 곡선, 노이즈 경계)
"""
from functools import partial
from typing import Iterator, List, Optional, Sequence, Tuple
import logging
import math
import numpy as np

from app.core.config import settings
from app.core.exceptions import ContractViolation
from app.dto.approx import PolyRegressor
from app.dto.envs import FunctionEstimationEnv
from app.dto.overest import ActionFits, BiasCurve, NoiseEstimate, NoiseModel, OverestMethod
from app.services.env_service import states_without, true_value
from app.services.hindsight_service import smoothed_reward
from app.services.poly_service import poly_eval, poly_fit

logger = logging.getLogger(__name__)

OVEREST_METHODS: Tuple[str, ...] = ("dqn", "ddqn", "dqn_h", "ddqn_h")


def derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    """고정점이 없는 순열 (n ≥ 2)"""
    if n < 2:
        raise ContractViolation(f"n ≥ 2 에서만 고정점 없는 순열이 존재합니다: {n}")
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm


def _values(fits: Sequence[PolyRegressor], states: np.ndarray) -> np.ndarray:
    """(A, len(states)) 행동별 추정값"""
    return np.stack([poly_eval(f, states) for f in fits])


def _max_estimate(fits: Sequence[PolyRegressor], states: np.ndarray) -> np.ndarray:
    return _values(fits, states).max(axis=0)


def _double_estimate(
    select: Sequence[PolyRegressor],
    evaluate: Sequence[PolyRegressor],
    states: np.ndarray,
) -> np.ndarray:
    """Q̂_eval(s, argmax_a Q̂_select(s, a))"""
    best = np.argmax(_values(select, states), axis=0)
    return _values(evaluate, states)[best, np.arange(states.size)]


def _fit_round(
    env: FunctionEstimationEnv,
    state_sets: List[np.ndarray],
    bootstrap,
    previous: Optional[Sequence[PolyRegressor]],
    gamma: float,
    delta: Optional[float],
    degree: int,
) -> List[PolyRegressor]:
    """
    한 라운드 재적합

    target = (1−γ)Q*(s) + γ·B(s), hindsight면 r_new = (target + δ·ȳ)/(1+δ),
    ȳ는 이전 라운드의 같은 (s, a) 적합값.
    """
    fits = []
    for action, states in enumerate(state_sets):
        q_star = true_value(env, states)
        if previous is None:
            targets = q_star
        else:
            targets = (1.0 - gamma) * q_star + gamma * bootstrap(states)
            if delta is not None:
                y_bar = poly_eval(previous[action], states)
                targets = smoothed_reward(targets, y_bar, delta)
        fits.append(poly_fit(np.column_stack([states, targets]), degree))
    return fits


def estimate_rounds(
    env: FunctionEstimationEnv,
    method: OverestMethod,
    delta: float = 1.0,
    rounds: Optional[int] = None,
    degree: Optional[int] = None,
    gamma: Optional[float] = None,
    seed: int = 0,
) -> Iterator[ActionFits]:
    """
    라운드별 행동 회귀 집합 생성 (라운드 0은 참값에 대한 직접 회귀)

    Args:
        env: 함수 추정 환경
        method: dqn, ddqn, dqn_h, ddqn_h
        delta: hindsight 계수 (hindsight가 아닌 방법에서는 무시)
        rounds: 재적합 라운드 수 (기본 settings.OVEREST_ROUNDS)
        degree: 다항식 차수 (기본 settings.POLY_DEGREE)
        gamma: 부트스트랩 할인율 (기본 settings.OVEREST_GAMMA)
        seed: ddqn 평가 집합의 제거 쌍 순열 시드

    Yields:
        ActionFits (round = 0 .. rounds−1)
    """
    rounds = settings.OVEREST_ROUNDS if rounds is None else rounds
    degree = settings.POLY_DEGREE if degree is None else degree
    gamma = settings.OVEREST_GAMMA if gamma is None else gamma
    if method not in OVEREST_METHODS:
        raise ContractViolation(f"알 수 없는 방법: {method}")
    if rounds < 1:
        raise ContractViolation(f"rounds는 1 이상이어야 합니다: {rounds}")
    if not 0.0 <= gamma <= 1.0:
        raise ContractViolation(f"gamma는 [0, 1] 범위여야 합니다: {gamma}")

    hindsight_delta = delta if method.endswith("_h") else None
    double = method.startswith("ddqn")

    select_sets = [states_without(env, pair) for pair in env.removed_pairs]
    select = _fit_round(env, select_sets, None, None, gamma, hindsight_delta, degree)
    evaluate: Optional[List[PolyRegressor]] = None
    if double:
        # 평가 집합은 Q*에 한 번만 적합하고 고정한다
        perm = derangement(env.n_actions, np.random.default_rng(seed))
        eval_sets = [states_without(env, env.removed_pairs[int(p)]) for p in perm]
        evaluate = _fit_round(env, eval_sets, None, None, gamma, None, degree)
    yield ActionFits(selector=select, evaluator=evaluate, round=0)

    for k in range(1, rounds):
        prev_select = select
        if double:
            bootstrap = partial(_double_estimate, prev_select, evaluate)
        else:
            bootstrap = partial(_max_estimate, prev_select)
        select = _fit_round(env, select_sets, bootstrap, prev_select, gamma, hindsight_delta, degree)
        yield ActionFits(selector=select, evaluator=evaluate, round=k)


def estimate_all(
    env: FunctionEstimationEnv,
    method: OverestMethod,
    delta: float = 1.0,
    rounds: Optional[int] = None,
    degree: Optional[int] = None,
    gamma: Optional[float] = None,
    seed: int = 0,
) -> ActionFits:
    """마지막 라운드의 행동 회귀 집합"""
    fits = None
    for fits in estimate_rounds(env, method, delta, rounds, degree, gamma, seed):
        pass
    logger.info(f"함수 추정 완료: method={method}, δ={delta}, rounds={fits.round + 1}, seed={seed}")
    return fits


def bias_curve(
    fits: ActionFits | Sequence[PolyRegressor],
    env: FunctionEstimationEnv,
    method_label: str = "",
) -> BiasCurve:
    """
    평가 격자 위 편향 곡선

    단일 추정은 max_a Q̂(s,a), 이중 추정은 selector의 argmax에서 evaluator 값.
    """
    if not isinstance(fits, ActionFits):
        fits = ActionFits(selector=list(fits))
    if len(fits.selector) != env.n_actions:
        raise ContractViolation(f"모든 행동({env.n_actions})의 회귀가 필요합니다: {len(fits.selector)}")
    grid = np.asarray(env.eval_grid, dtype=np.float64)
    if fits.is_double:
        estimate = _double_estimate(fits.selector, fits.evaluator, grid)
    else:
        estimate = _max_estimate(fits.selector, grid)
    return BiasCurve(grid=grid, bias=estimate - true_value(env, grid), method_label=method_label)


def mean_bias(curve: BiasCurve) -> float:
    return float(np.mean(curve.bias))


def mean_abs_bias(curve: BiasCurve) -> float:
    return float(np.mean(np.abs(curve.bias)))


def smoothness(curve: BiasCurve) -> float:
    """편향 1차 차분의 표준편차 (작을수록 매끄러움)"""
    return float(np.std(np.diff(curve.bias)))


# ===== 노이즈 경계 =====

def thrun_upper_bound(nm: NoiseModel) -> float:
    """γ·ε·(m−1)/(m+1)"""
    return nm.gamma * nm.epsilon * (nm.m - 1) / (nm.m + 1)


def lower_bound(C: float, m: int) -> float:
    """√(C/(m−1))"""
    if m < 2:
        raise ContractViolation(f"m은 2 이상이어야 합니다: {m}")
    if not C > 0.0:
        raise ContractViolation(f"C는 양수여야 합니다: {C}")
    return math.sqrt(C / (m - 1))


def noise_mc(nm: NoiseModel, trials: int, seed: int = 0, chunk: Optional[int] = None) -> NoiseEstimate:
    """
    γ·max_{a} U_a, U_a ~ Uniform[−ε, ε] 의 몬테카를로 평균

    Args:
        nm: 노이즈 모델
        trials: 시행 수
        seed: 생성기 시드
        chunk: 한 번에 추출할 시행 수 (기본 settings.NOISE_MC_CHUNK)

    Returns:
        NoiseEstimate (mean, std_error, trials, closed_form)
    """
    if trials < 1:
        raise ContractViolation(f"trials는 1 이상이어야 합니다: {trials}")
    chunk = settings.NOISE_MC_CHUNK if chunk is None else chunk
    rng = np.random.default_rng(seed)

    total, total_sq, done = 0.0, 0.0, 0
    while done < trials:
        k = min(chunk, trials - done)
        draws = rng.uniform(-nm.epsilon, nm.epsilon, size=(k, nm.m))
        samples = nm.gamma * draws.max(axis=1)
        total += float(samples.sum())
        total_sq += float(np.square(samples).sum())
        done += k

    mean = total / trials
    if trials > 1:
        variance = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    else:
        variance = 0.0
    estimate = NoiseEstimate(
        mean=mean,
        std_error=math.sqrt(variance / trials),
        trials=trials,
        closed_form=thrun_upper_bound(nm),
    )
    logger.info(
        f"노이즈 MC: m={nm.m}, ε={nm.epsilon}, γ={nm.gamma}, trials={trials} → "
        f"{estimate.mean:.6f} (closed form {estimate.closed_form:.6f})"
    )
    return estimate
