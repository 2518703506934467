"""
결과 파일 입출력 서비스 (CSV, 매니페스트)
"""
from pathlib import Path
from typing import Iterable, List, Tuple
import json
import logging

import pandas as pd

from app.dto.overest import BiasCurve, NoiseEstimate, NoiseModel
from app.dto.run import RunManifest
from app.dto.trainer import EpisodeStats, EvalSnapshot

logger = logging.getLogger(__name__)

EPISODE_COLUMNS = ["frame", "episode", "return", "mean_q", "epsilon", "seed", "variant", "delta"]
EVAL_COLUMNS = ["frame", "eval_return", "eval_mean_q", "seed", "variant", "delta"]
BIAS_COLUMNS = ["state", "bias", "method", "seed", "round"]
NOISE_COLUMNS = ["seed", "m", "epsilon", "gamma", "trials", "mean", "std_error", "closed_form"]

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.csv"


def _write_csv(df: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")


def write_episodes(path: Path, episodes: Iterable[EpisodeStats], seed: int, variant: str, delta: float) -> None:
    rows = [
        [e.frame_index, e.episode, e.episode_return, e.mean_selected_q, e.epsilon_at_end, seed, variant, delta]
        for e in episodes
    ]
    _write_csv(pd.DataFrame(rows, columns=EPISODE_COLUMNS), path)


def write_evals(path: Path, evals: Iterable[EvalSnapshot], seed: int, variant: str, delta: float) -> None:
    rows = [[e.frame, e.eval_return, e.eval_mean_q, seed, variant, delta] for e in evals]
    _write_csv(pd.DataFrame(rows, columns=EVAL_COLUMNS), path)


def write_bias(path: Path, curves: Iterable[Tuple[int, BiasCurve]], method: str, seed: int) -> None:
    """(round, BiasCurve) 목록을 한 파일로"""
    frames = [
        pd.DataFrame({
            "state": curve.grid,
            "bias": curve.bias,
            "method": method,
            "seed": seed,
            "round": round_index,
        }, columns=BIAS_COLUMNS)
        for round_index, curve in curves
    ]
    df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=BIAS_COLUMNS)
    _write_csv(df, path)


def write_noise(path: Path, estimate: NoiseEstimate, nm: NoiseModel, seed: int) -> None:
    row = [seed, nm.m, nm.epsilon, nm.gamma, estimate.trials, estimate.mean, estimate.std_error, estimate.closed_form]
    _write_csv(pd.DataFrame([row], columns=NOISE_COLUMNS), path)


def write_summary(run_dir: Path, table: pd.DataFrame) -> Path:
    path = run_dir / SUMMARY_NAME
    _write_csv(table, path)
    return path


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    """정렬된 키, 타임스탬프 없음 (재실행 시 바이트 동일)"""
    path = run_dir / MANIFEST_NAME
    payload = json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True)
    path.write_text(payload + "\n", encoding="utf-8")
    return path


def read_manifest(run_dir: Path) -> RunManifest:
    path = run_dir / MANIFEST_NAME
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))


def read_csv(path: Path, columns: List[str]) -> pd.DataFrame:
    """CSV 읽기 (필수 컬럼 누락 시 ValueError)"""
    df = pd.read_csv(path)
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ValueError(f"필수 컬럼 누락: {missing}")
    return df

