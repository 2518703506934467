"""
hindsight 학습 루프 (ε-greedy 행동, 수정된 재생 버퍼, 미니배치 갱신, 타깃 동기화)
"""
from typing import Any, Callable, List, Optional, Sequence, Tuple
import logging
import numpy as np

from app.agent.networks import BaseQNetwork, build_network
from app.agent.policy import epsilon_at, select_action
from app.agent.utils import track_execution_time
from app.core.config import settings
from app.core.exceptions import ContractViolation, DivergenceError
from app.dto.approx import Activation
from app.dto.qcore import HindsightConfig, Transition
from app.dto.trainer import AgentVariant, EpisodeStats, EvalSnapshot, TrainDiagnostics, TrainResult
from app.services.envs import BaseEnv, TabularEnv
from app.services.hindsight_service import (
    ddqn_targets,
    dqn_targets,
    sgd_update_batch,
    tabular_update,
    watkins_update,
)
from app.services.replay_buffer import HindsightBuffer

logger = logging.getLogger(__name__)

# (frame, 저장된 전이, 온라인 파라미터, 타깃 파라미터)
FrameHook = Callable[[int, Transition, Any, Any], None]


def sync_target(online: Any, target: Any) -> Any:
    """θ⁻ ← θ (레이아웃이 다르면 ContractViolation)"""
    target.load_from(online)
    return target


def _spawn_rngs(seed: int) -> Tuple[np.random.Generator, ...]:
    """초기화 / 행동 / 환경 / 평가 생성기와 버퍼 시드"""
    init_ss, act_ss, env_ss, eval_ss, buffer_ss = np.random.SeedSequence(seed).spawn(5)
    return (
        np.random.default_rng(init_ss),
        np.random.default_rng(act_ss),
        np.random.default_rng(env_ss),
        np.random.default_rng(eval_ss),
        buffer_ss,
    )


def _check_q(values: np.ndarray | float, ceiling: float, frame: int, what: str) -> None:
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise DivergenceError(f"{what}에 유한하지 않은 값이 있습니다.", frame=frame)
    peak = float(np.max(np.abs(arr))) if arr.size else 0.0
    if peak > ceiling:
        raise DivergenceError(f"{what} |Q|={peak:.3e} 가 상한 {ceiling:.1e}을 넘었습니다.", frame=frame)


def evaluate_policy(
    network: BaseQNetwork,
    params: Any,
    env: BaseEnv,
    episodes: int,
    epsilon: float,
    rng: np.random.Generator,
    max_episode_steps: int,
) -> Tuple[float, float]:
    """
    거의 탐욕적인 정책으로 에피소드를 돌려 (평균 return, 선택된 Q 평균) 반환
    """
    returns: List[float] = []
    selected_q: List[float] = []
    for _ in range(episodes):
        state = env.reset()
        total = 0.0
        for _ in range(max_episode_steps):
            action, q = select_action(network, params, env.observe(state), epsilon, rng)
            selected_q.append(q)
            state, reward, terminal = env.step(state, action, rng)
            total += reward
            if terminal:
                break
        returns.append(total)
    return float(np.mean(returns)), float(np.mean(selected_q))


def greedy_policy_of(network: BaseQNetwork, params: Any, env: TabularEnv) -> np.ndarray:
    """모든 상태의 탐욕 행동 (동률은 낮은 인덱스)"""
    observations = np.stack([env.observe(s) for s in range(env.n_states)])
    q, _ = network.forward(params, observations)
    return np.argmax(q, axis=1)


@track_execution_time("train_run")
def train_run(
    env: BaseEnv,
    variant: AgentVariant,
    frames: int,
    seed: int,
    hidden_widths: Optional[Sequence[int]] = None,
    activation: Activation = "relu",
    eval_interval: int = 0,
    eval_episodes: Optional[int] = None,
    max_episode_steps: Optional[int] = None,
    hook: Optional[FrameHook] = None,
) -> TrainResult:
    """
    hindsight 학습 루프 실행

    매 프레임: 행동 → (s, s', a, Q(s,a;θ), r) 저장 → 미니배치 추출 →
    변형별 ŷ 계산 → hindsight 손실로 SGD → 주기적으로 θ⁻ 동기화.

    Args:
        env: 학습 환경
        variant: 에이전트 변형 (base, hindsight, 설정)
        frames: 학습 프레임 수 (> 0)
        seed: 실행 시드 (같은 시드면 결과가 같다)
        hidden_widths: 은닉층 폭 (기본 settings.HIDDEN_WIDTHS)
        activation: 은닉층 활성화
        eval_interval: 평가 주기 (0이면 마지막 프레임에서만 평가)
        eval_episodes: 평가 에피소드 수
        max_episode_steps: 에피소드 최대 길이 (초과 시 종료가 아닌 중단)
        hook: 전이 저장 직후, 학습 전에 호출되는 콜백

    Returns:
        TrainResult
    """
    if frames <= 0:
        raise ContractViolation(f"frames는 양의 정수여야 합니다: {frames}")
    if eval_interval < 0:
        raise ContractViolation(f"eval_interval은 0 이상이어야 합니다: {eval_interval}")

    config = variant.config
    hidden = list(settings.HIDDEN_WIDTHS if hidden_widths is None else hidden_widths)
    eval_episodes = settings.EVAL_EPISODES if eval_episodes is None else eval_episodes
    max_steps = max_episode_steps or getattr(env, "max_episode_steps", settings.MAX_EPISODE_STEPS)

    init_rng, act_rng, env_rng, eval_rng, buffer_seed = _spawn_rngs(seed)
    network = build_network(variant.base, env.obs_dim, env.n_actions, hidden, activation)
    online = network.init_params(init_rng)
    target = online.copy()
    buffer = HindsightBuffer(config.buffer_capacity, rng_seed=buffer_seed)

    result = TrainResult(params=online)
    diagnostics = result.diagnostics

    def record_eval(frame: int) -> None:
        ret, mean_q = evaluate_policy(
            network, online, env, eval_episodes, settings.EVAL_EPSILON, eval_rng, max_steps
        )
        result.evals.append(EvalSnapshot(frame=frame, eval_return=ret, eval_mean_q=mean_q))

    logger.info(
        f"🚀 학습 시작: variant={variant.label}, δ={config.delta}, seed={seed}, frames={frames}"
    )

    state = env.reset()
    episode, steps, episode_return, episode_q = 0, 0, 0.0, 0.0
    last_eval_frame = -1
    frame = 0
    try:
        for frame in range(frames):
            epsilon = epsilon_at(config, frame)
            obs = env.observe(state)
            action, behavior_q = select_action(network, online, obs, epsilon, act_rng)
            _check_q(behavior_q, config.q_ceiling, frame, "행동 Q")

            next_state, reward, terminal = env.step(state, action, env_rng)
            transition = Transition(
                state=tuple(obs.tolist()),
                next_state=tuple(env.observe(next_state).tolist()),
                action=action,
                reward=reward,
                terminal=terminal,
                behavior_q=behavior_q,
            )
            buffer.push(transition)
            if hook is not None:
                hook(frame, transition, online, target)

            if len(buffer) >= config.batch_size:
                batch = buffer.sample_batch(config.batch_size)
                if variant.base == "ddqn":
                    y_hat = ddqn_targets(network, online, target, batch, config.gamma)
                else:
                    y_hat = dqn_targets(network, target, batch, config.gamma)
                try:
                    q = sgd_update_batch(network, online, batch, y_hat, config, hindsight=variant.hindsight)
                except DivergenceError as e:
                    raise DivergenceError(e.detail, frame=frame)
                _check_q(q, config.q_ceiling, frame, "미니배치 Q")
                if not online.all_finite():
                    raise DivergenceError("파라미터에 유한하지 않은 값이 있습니다.", frame=frame)
                diagnostics.updates += 1

            if (frame + 1) % config.target_sync_period == 0:
                sync_target(online, target)
                diagnostics.target_syncs += 1

            steps += 1
            episode_return += reward
            episode_q += behavior_q
            if terminal or steps >= max_steps:
                result.episodes.append(EpisodeStats(
                    episode=episode,
                    episode_return=episode_return,
                    mean_selected_q=episode_q / steps,
                    steps=steps,
                    epsilon_at_end=epsilon,
                    frame_index=frame,
                ))
                episode += 1
                steps, episode_return, episode_q = 0, 0.0, 0.0
                state = env.reset()
            else:
                state = next_state

            if eval_interval and (frame + 1) % eval_interval == 0:
                record_eval(frame + 1)
                last_eval_frame = frame + 1

        diagnostics.frames_run = frames
        if last_eval_frame != frames:
            record_eval(frames)
        logger.info(
            f"✅ 학습 완료: variant={variant.label}, seed={seed}, "
            f"episodes={len(result.episodes)}, updates={diagnostics.updates}"
        )
    except DivergenceError as e:
        diagnostics.status = "diverged"
        diagnostics.diverged_frame = e.frame if e.frame is not None else frame
        diagnostics.reason = e.detail
        diagnostics.frames_run = diagnostics.diverged_frame
        logger.warning(
            f"⚠️ 학습 발산: variant={variant.label}, δ={config.delta}, seed={seed}, "
            f"frame={diagnostics.diverged_frame}, 원인={e.detail}"
        )

    return result


@track_execution_time("train_tabular_run")
def train_tabular_run(
    env: TabularEnv,
    config: HindsightConfig,
    frames: int,
    seed: int,
    hindsight: bool = True,
    max_episode_steps: Optional[int] = None,
) -> TrainResult:
    """
    테이블형 hindsight Q-learning

    수정된 버퍼에 Q_j(s,a)를 함께 저장하고, 추출된 전이마다
    tabular_update (hindsight) 또는 watkins_update 를 순서대로 적용한다.

    Returns:
        TrainResult (params는 Q 테이블)
    """
    if frames <= 0:
        raise ContractViolation(f"frames는 양의 정수여야 합니다: {frames}")
    max_steps = max_episode_steps or env.max_episode_steps
    _, act_rng, env_rng, _, buffer_seed = _spawn_rngs(seed)
    buffer = HindsightBuffer(config.buffer_capacity, rng_seed=buffer_seed)
    q_table = np.zeros((env.n_states, env.n_actions))
    result = TrainResult(params=q_table)

    state = env.reset()
    episode, steps, episode_return, episode_q = 0, 0, 0.0, 0.0
    for frame in range(frames):
        epsilon = epsilon_at(config, frame)
        if act_rng.random() < epsilon:
            action = int(act_rng.integers(env.n_actions))
        else:
            action = int(np.argmax(q_table[state]))
        behavior_q = float(q_table[state, action])
        next_state, reward, terminal = env.step(state, action, env_rng)
        buffer.push(Transition(
            state=(float(state),), next_state=(float(next_state),), action=action,
            reward=reward, terminal=terminal, behavior_q=behavior_q,
        ))

        if len(buffer) >= config.batch_size:
            for t in buffer.sample(config.batch_size):
                s, s2 = int(t.state[0]), int(t.next_state[0])
                if hindsight:
                    q_table = tabular_update(q_table, s, t.action, s2, t.reward, t.behavior_q, config, t.terminal)
                else:
                    q_table = watkins_update(q_table, s, t.action, s2, t.reward, config, t.terminal)
            result.diagnostics.updates += 1

        steps += 1
        episode_return += reward
        episode_q += behavior_q
        if terminal or steps >= max_steps:
            result.episodes.append(EpisodeStats(
                episode=episode, episode_return=episode_return, mean_selected_q=episode_q / steps,
                steps=steps, epsilon_at_end=epsilon, frame_index=frame,
            ))
            episode += 1
            steps, episode_return, episode_q = 0, 0.0, 0.0
            state = env.reset()
        else:
            state = next_state

    result.params = q_table
    result.diagnostics.frames_run = frames
    return result
