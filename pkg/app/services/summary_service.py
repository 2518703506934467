"""
실행 결과 요약 서비스 (변형별 평균 ± 표준편차, 대조군 대비 승수)
"""
from pathlib import Path
from typing import List, Optional
import logging

import numpy as np
import pandas as pd

from app.core.exceptions import SummaryError
from app.dto.overest import BiasCurve
from app.dto.run import CellResult, RunManifest
from app.services.overest_service import mean_abs_bias, mean_bias, smoothness
from app.services.results_service import (
    BIAS_COLUMNS,
    EVAL_COLUMNS,
    MANIFEST_NAME,
    NOISE_COLUMNS,
    SUMMARY_NAME,
    read_csv,
    read_manifest,
)

logger = logging.getLogger(__name__)

TRAIN_SUMMARY_COLUMNS = [
    "variant", "delta", "n_seeds", "n_diverged",
    "final_return_mean", "final_return_sd", "mean_q_mean", "mean_q_sd",
    "counterpart", "wins_vs_counterpart",
]
OVEREST_SUMMARY_COLUMNS = [
    "method", "delta", "n_seeds",
    "mean_bias_mean", "mean_bias_sd", "mean_abs_bias_mean", "mean_abs_bias_sd",
    "smoothness_mean", "smoothness_sd",
]
NOISE_SUMMARY_COLUMNS = [
    "seed", "m", "epsilon", "gamma", "trials", "empirical_mean", "std_error", "closed_form", "relative_error",
]


def _sd(values: pd.Series) -> float:
    """표본 표준편차 (값이 하나면 0)"""
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1))


def counterpart_label(variant: str) -> Optional[str]:
    """dqn-h → dqn, dqn-half → dqn, dqn → None"""
    for suffix in ("-half", "-h"):
        if variant.endswith(suffix):
            return variant[: -len(suffix)]
    return None


def _load_cell_table(
    run_dir: Path,
    cell: CellResult,
    prefix: str,
    columns: List[str],
    problems: List[str],
) -> Optional[pd.DataFrame]:
    """셀의 prefix 디렉토리 CSV (없으면 None, 문제는 problems에 기록)"""
    for name in cell.files:
        if not name.startswith(prefix):
            continue
        path = run_dir / name
        if not path.is_file():
            problems.append(f"파일 없음: {name}")
            return None
        try:
            return read_csv(path, columns)
        except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            problems.append(f"파일 손상: {name} ({e})")
            return None
    return None


def _train_summary(run_dir: Path, manifest: RunManifest, problems: List[str]) -> pd.DataFrame:
    finals = []
    for cell in manifest.cells:
        if cell.status == "failed":
            continue
        record = {"variant": cell.label, "delta": cell.delta, "seed": cell.seed,
                  "diverged": cell.status == "diverged", "final_return": np.nan, "mean_q": np.nan}
        evals = _load_cell_table(run_dir, cell, "evals/", EVAL_COLUMNS, problems)
        if cell.status == "completed":
            if evals is None or len(evals) == 0:
                problems.append(f"평가 기록 없음: {cell.cell_id}")
                continue
            last = evals.sort_values("frame").iloc[-1]
            record["final_return"] = float(last["eval_return"])
            record["mean_q"] = float(last["eval_mean_q"])
        finals.append(record)
    if not finals:
        return pd.DataFrame(columns=TRAIN_SUMMARY_COLUMNS)
    runs = pd.DataFrame(finals)
    completed = runs[~runs["diverged"]]

    rows = []
    for (variant, delta), group in runs.groupby(["variant", "delta"], sort=True):
        done = group[~group["diverged"]]
        counterpart = counterpart_label(variant)
        wins = pd.NA
        if counterpart is not None:
            base = completed[completed["variant"] == counterpart].set_index("seed")["final_return"]
            if len(base):
                wins = int(sum(
                    1 for seed, ret in zip(done["seed"], done["final_return"])
                    if seed in base.index and ret > base.loc[seed]
                ))
        rows.append({
            "variant": variant,
            "delta": delta,
            "n_seeds": int(len(done)),
            "n_diverged": int(group["diverged"].sum()),
            "final_return_mean": float(done["final_return"].mean()) if len(done) else np.nan,
            "final_return_sd": _sd(done["final_return"]),
            "mean_q_mean": float(done["mean_q"].mean()) if len(done) else np.nan,
            "mean_q_sd": _sd(done["mean_q"]),
            "counterpart": counterpart or "",
            "wins_vs_counterpart": wins,
        })
    table = pd.DataFrame(rows, columns=TRAIN_SUMMARY_COLUMNS)
    table["wins_vs_counterpart"] = table["wins_vs_counterpart"].astype("Int64")
    return table


def _overest_summary(run_dir: Path, manifest: RunManifest, problems: List[str]) -> pd.DataFrame:
    per_seed = []
    for cell in manifest.cells:
        if cell.status == "failed":
            continue
        df = _load_cell_table(run_dir, cell, "bias/", BIAS_COLUMNS, problems)
        if df is None or len(df) == 0:
            problems.append(f"편향 기록 없음: {cell.cell_id}")
            continue
        final = df[df["round"] == df["round"].max()].sort_values("state")
        curve = BiasCurve(
            grid=final["state"].to_numpy(dtype=np.float64),
            bias=final["bias"].to_numpy(dtype=np.float64),
            method_label=cell.label,
        )
        per_seed.append({
            "method": cell.label,
            "delta": cell.delta,
            "seed": cell.seed,
            "mean_bias": mean_bias(curve),
            "mean_abs_bias": mean_abs_bias(curve),
            "smoothness": smoothness(curve),
        })
    if not per_seed:
        return pd.DataFrame(columns=OVEREST_SUMMARY_COLUMNS)
    runs = pd.DataFrame(per_seed)
    rows = []
    for (method, delta), group in runs.groupby(["method", "delta"], sort=True):
        rows.append({
            "method": method,
            "delta": delta,
            "n_seeds": int(len(group)),
            "mean_bias_mean": float(group["mean_bias"].mean()),
            "mean_bias_sd": _sd(group["mean_bias"]),
            "mean_abs_bias_mean": float(group["mean_abs_bias"].mean()),
            "mean_abs_bias_sd": _sd(group["mean_abs_bias"]),
            "smoothness_mean": float(group["smoothness"].mean()),
            "smoothness_sd": _sd(group["smoothness"]),
        })
    return pd.DataFrame(rows, columns=OVEREST_SUMMARY_COLUMNS)


def _noise_summary(run_dir: Path, manifest: RunManifest, problems: List[str]) -> pd.DataFrame:
    tables = []
    for cell in manifest.cells:
        if cell.status == "failed":
            continue
        df = _load_cell_table(run_dir, cell, "noise/", NOISE_COLUMNS, problems)
        if df is not None:
            tables.append(df)
    if not tables:
        return pd.DataFrame(columns=NOISE_SUMMARY_COLUMNS)
    runs = pd.concat(tables, ignore_index=True).sort_values("seed")
    table = pd.DataFrame({
        "seed": runs["seed"],
        "m": runs["m"],
        "epsilon": runs["epsilon"],
        "gamma": runs["gamma"],
        "trials": runs["trials"],
        "empirical_mean": runs["mean"],
        "std_error": runs["std_error"],
        "closed_form": runs["closed_form"],
    })
    closed = table["closed_form"].to_numpy(dtype=np.float64)
    diff = np.abs(table["empirical_mean"].to_numpy(dtype=np.float64) - closed)
    table["relative_error"] = np.where(closed != 0.0, diff / np.where(closed != 0.0, closed, 1.0), diff)
    return table.reset_index(drop=True)[NOISE_SUMMARY_COLUMNS]


def build_summary(run_dir: Path, manifest: RunManifest) -> pd.DataFrame:
    """
    원본 CSV로부터 요약 테이블 계산

    Raises:
        SummaryError: 목록의 파일이 없거나 손상된 경우 (항목별 보고)
    """
    problems: List[str] = []
    if manifest.experiment in ("train", "delta_sweep"):
        table = _train_summary(run_dir, manifest, problems)
    elif manifest.experiment == "overest":
        table = _overest_summary(run_dir, manifest, problems)
    else:
        table = _noise_summary(run_dir, manifest, problems)

    if problems:
        raise SummaryError(problems)
    return table


def summarize(run_dir: str | Path) -> pd.DataFrame:
    """
    실행 디렉토리 요약

    Args:
        run_dir: manifest.json이 있는 실행 디렉토리

    Returns:
        요약 테이블 (DataFrame)
    """
    run_dir = Path(run_dir)
    if not (run_dir / MANIFEST_NAME).is_file():
        raise SummaryError([f"{MANIFEST_NAME} 없음: {run_dir}"])
    try:
        manifest = read_manifest(run_dir)
    except ValueError as e:
        raise SummaryError([f"{MANIFEST_NAME} 손상: {e}"])

    problems = [
        f"파일 없음: {name}"
        for name in manifest.files
        if name != SUMMARY_NAME and not (run_dir / name).is_file()
    ]
    if problems:
        raise SummaryError(problems)

    table = build_summary(run_dir, manifest)
    logger.info(f"📊 요약 완료: {run_dir} ({len(table)}행)")
    return table
