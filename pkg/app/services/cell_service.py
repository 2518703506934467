"""
실험 셀 실행 서비스 (학습 / 과대추정 / 노이즈 경계)
"""
from pathlib import Path
import logging

from app.agent.utils import track_execution_time
from app.core.exceptions import ContractViolation
from app.dto.overest import NoiseModel
from app.dto.run import CellResult, CellSpec, RunConfig
from app.dto.trainer import AgentVariant
from app.services.config_service import build_hindsight_config
from app.services.env_service import function_estimation_env, get_env
from app.services.overest_service import bias_curve, estimate_rounds, noise_mc
from app.services.results_service import write_bias, write_episodes, write_evals, write_noise
from app.services.trainer_service import train_run

logger = logging.getLogger(__name__)


def _train_cell(config: RunConfig, cell: CellSpec, run_dir: Path) -> CellResult:
    variant = AgentVariant(
        base=cell.variant.base,
        hindsight=cell.variant.hindsight,
        config=build_hindsight_config(config, cell),
    )
    env = get_env(config.env, config.agent.gamma)
    result = train_run(
        env,
        variant,
        frames=config.frames,
        seed=cell.seed,
        hidden_widths=config.agent.hidden_widths,
        activation=config.agent.activation,
        eval_interval=config.eval_interval,
        eval_episodes=config.eval_episodes,
        max_episode_steps=config.env.max_episode_steps,
    )
    episodes_file = f"episodes/{cell.cell_id}.csv"
    evals_file = f"evals/{cell.cell_id}.csv"
    write_episodes(run_dir / episodes_file, result.episodes, cell.seed, variant.label, cell.delta)
    write_evals(run_dir / evals_file, result.evals, cell.seed, variant.label, cell.delta)

    diagnostics = result.diagnostics
    return CellResult(
        cell_id=cell.cell_id,
        label=variant.label,
        seed=cell.seed,
        delta=cell.delta,
        status=diagnostics.status,
        files=[episodes_file, evals_file],
        diverged_frame=diagnostics.diverged_frame,
        reason=diagnostics.reason,
    )


def _overest_cell(config: RunConfig, cell: CellSpec, run_dir: Path) -> CellResult:
    spec = config.overest
    env = function_estimation_env(spec.true_value)
    curves = [
        (fits.round, bias_curve(fits, env, cell.method))
        for fits in estimate_rounds(
            env, cell.method, delta=cell.delta, rounds=config.rounds,
            degree=spec.degree, gamma=spec.gamma, seed=cell.seed,
        )
    ]
    bias_file = f"bias/{cell.cell_id}.csv"
    write_bias(run_dir / bias_file, curves, cell.method, cell.seed)
    return CellResult(
        cell_id=cell.cell_id, label=cell.method, seed=cell.seed, delta=cell.delta,
        status="completed", files=[bias_file],
    )


def _noise_cell(config: RunConfig, cell: CellSpec, run_dir: Path) -> CellResult:
    nm = NoiseModel(epsilon=config.noise.epsilon, m=config.noise.m, gamma=config.noise.gamma)
    estimate = noise_mc(nm, config.trials, seed=cell.seed)
    noise_file = f"noise/{cell.cell_id}.csv"
    write_noise(run_dir / noise_file, estimate, nm, cell.seed)
    return CellResult(
        cell_id=cell.cell_id, label="noise", seed=cell.seed, status="completed", files=[noise_file],
    )


CELL_RUNNERS = {
    "train": _train_cell,
    "overest": _overest_cell,
    "noise": _noise_cell,
}


@track_execution_time("execute_cell")
def execute_cell(config: RunConfig, cell: CellSpec) -> CellResult:
    """
    셀 하나 실행 후 결과 파일 작성 (셀마다 자기 파일만 씀)

    Args:
        config: 실행 설정
        cell: 실행할 셀

    Returns:
        CellResult (파일 경로는 실행 디렉토리 기준 상대 경로)
    """
    runner = CELL_RUNNERS.get(cell.kind)
    if runner is None:
        raise ContractViolation(f"알 수 없는 셀 종류: {cell.kind}")
    run_dir = Path(config.output_dir)
    try:
        return runner(config, cell, run_dir)
    except Exception:
        # 실패한 셀은 파일을 남기지 않는다
        for partial in run_dir.glob(f"*/{cell.cell_id}.csv"):
            partial.unlink(missing_ok=True)
            logger.warning(f"부분 결과 삭제: {partial}")
        raise
