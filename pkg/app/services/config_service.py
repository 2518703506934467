"""
실행 설정 로드/검증 서비스 (YAML + CLI 덮어쓰기, 설정 해시, 셀 전개)
"""
from pathlib import Path
from typing import Any, Dict, List, Optional
import copy
import hashlib
import json
import logging

import yaml
from pydantic import ValidationError

from app.core.exceptions import ConfigError
from app.dto.qcore import HindsightConfig
from app.dto.run import CellSpec, RunConfig, VariantSpec

logger = logging.getLogger(__name__)

# 설정 해시에서 제외되는 키 (결과에 영향 없음)
HASH_EXCLUDED_KEYS = {"output_dir", "jobs"}


def _loc_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def apply_cli_overrides(
    raw: Dict[str, Any],
    out: Optional[str] = None,
    jobs: Optional[int] = None,
    allow_divergence_study: bool = False,
) -> Dict[str, Any]:
    """CLI 플래그 값을 파일 설정 위에 덮어씀 (지정된 값만)"""
    merged = copy.deepcopy(raw)
    if out is not None:
        merged["output_dir"] = out
    if jobs is not None:
        merged["jobs"] = jobs
    if allow_divergence_study:
        merged["allow_divergence_study"] = True
    return merged


def parse_run_config(raw: Any) -> RunConfig:
    """
    dict → RunConfig 검증

    Raises:
        ConfigError: 검증 실패 (첫 번째 오류의 키 경로 포함)
    """
    if not isinstance(raw, dict):
        raise ConfigError("", "설정 최상위는 매핑이어야 합니다.")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_loc_path(first["loc"]), first["msg"])


def load_run_config(
    path: str | Path,
    out: Optional[str] = None,
    jobs: Optional[int] = None,
    allow_divergence_study: bool = False,
) -> RunConfig:
    """
    YAML 설정 파일 로드

    Args:
        path: 설정 파일 경로
        out: 출력 디렉토리 덮어쓰기
        jobs: 워커 수 덮어쓰기
        allow_divergence_study: 음수 δ 허용

    Returns:
        RunConfig
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            raw = yaml.safe_load(file)
    except FileNotFoundError:
        raise ConfigError(str(path), "설정 파일이 없습니다.")
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"YAML 파싱 실패: {e}")

    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "설정 최상위는 매핑이어야 합니다.")

    config = parse_run_config(apply_cli_overrides(raw, out, jobs, allow_divergence_study))
    logger.info(f"설정 로드 완료: {path} (experiment={config.experiment}, seeds={config.seeds})")
    return config


def config_hash(config: RunConfig) -> str:
    """키 순서와 무관한 설정 해시 (sha256, 출력 위치/워커 수 제외)"""
    payload = config.model_dump(mode="json", exclude=HASH_EXCLUDED_KEYS)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_delta(delta: float) -> str:
    """파일 이름용 δ 표기 (1.0 → 1, 0.5 → 0.5)"""
    return f"{delta:g}"


def train_cell_id(variant: VariantSpec, delta: float, seed: int) -> str:
    return f"{variant.label}_d{format_delta(delta)}_s{seed}"


def expand_cells(config: RunConfig) -> List[CellSpec]:
    """
    설정을 독립 실행 셀 목록으로 전개

    - train / delta_sweep: variant × δ × seed (hindsight를 쓰지 않는 변형은 seed당 한 번, δ=0)
    - overest: method × seed
    - noise_bound: seed
    """
    cells: List[CellSpec] = []
    if config.is_training:
        for variant in config.variants:
            deltas = config.deltas if variant.uses_delta else [0.0]
            for delta in deltas:
                for seed in config.seeds:
                    cells.append(CellSpec(
                        cell_id=train_cell_id(variant, delta, seed),
                        kind="train", seed=seed, delta=delta, variant=variant,
                    ))
    elif config.experiment == "overest":
        for method in config.overest.methods:
            for seed in config.seeds:
                cells.append(CellSpec(
                    cell_id=f"{method}_s{seed}", kind="overest", seed=seed,
                    delta=config.overest.delta if method.endswith("_h") else 0.0, method=method,
                ))
    else:
        for seed in config.seeds:
            cells.append(CellSpec(cell_id=f"noise_s{seed}", kind="noise", seed=seed))

    ids = [c.cell_id for c in cells]
    if len(set(ids)) != len(ids):
        raise ConfigError("variants", "같은 이름의 셀이 중복 생성됩니다 (variants 중복 확인).")
    return cells


def build_hindsight_config(config: RunConfig, cell: CellSpec) -> HindsightConfig:
    """셀의 HindsightConfig (학습 하이퍼파라미터 + δ)"""
    agent = config.agent
    return HindsightConfig(
        delta=cell.delta,
        gamma=agent.gamma,
        alpha=agent.alpha,
        target_sync_period=agent.target_sync_period,
        epsilon_start=agent.epsilon_start,
        epsilon_end=agent.epsilon_end,
        epsilon_decay_steps=agent.epsilon_decay_steps,
        batch_size=agent.batch_size,
        buffer_capacity=agent.buffer_capacity,
        q_ceiling=agent.q_ceiling,
        lr_half_mode=cell.variant.lr_half_mode if cell.variant else False,
        allow_divergence_study=config.allow_divergence_study,
    )
