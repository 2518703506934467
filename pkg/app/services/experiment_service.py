"""
배치 실험 실행 서비스 (셀 전개 → 워커 풀 실행 → 매니페스트/요약 작성)
"""
from pathlib import Path
from typing import List
import asyncio
import logging

from app.core.taskiq import create_broker
from app.dto.run import CellResult, CellSpec, RunConfig, RunManifest
from app.services.config_service import config_hash, expand_cells
from app.services.results_service import SUMMARY_NAME, write_manifest, write_summary
from app.services.summary_service import build_summary
from app.worker.tasks import register_cell_task

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CELL_FAILURE = 1
EXIT_CONFIG_ERROR = 2


async def _run_cells(config: RunConfig, cells: List[CellSpec]) -> List[CellResult]:
    """모든 셀을 브로커 워커 풀에 보내고 결과를 셀 순서대로 수집"""
    broker = create_broker(config.jobs, capacity=len(cells))
    task = register_cell_task(broker)
    payload = config.model_dump(mode="json")
    await broker.startup()
    try:
        sent = [await task.kiq(payload, cell.model_dump(mode="json")) for cell in cells]
        results = []
        for cell, handle in zip(cells, sent):
            outcome = await handle.wait_result()
            if outcome.is_err:
                logger.error(f"셀 태스크 오류: {cell.cell_id} ({outcome.error})")
                results.append(CellResult(
                    cell_id=cell.cell_id, label=cell.label, seed=cell.seed, delta=cell.delta,
                    status="failed", reason=str(outcome.error),
                ))
            else:
                results.append(CellResult.model_validate(outcome.return_value))
        return results
    finally:
        await broker.shutdown()


def run(config: RunConfig) -> RunManifest:
    """
    실행 설정의 모든 셀을 실행하고 결과 파일, 요약, 매니페스트를 작성

    Args:
        config: 검증된 실행 설정

    Returns:
        RunManifest
    """
    run_dir = Path(config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    cells = expand_cells(config)
    logger.info(f"🚀 실험 시작: {config.experiment}, 셀 {len(cells)}개, jobs={config.jobs}, out={run_dir}")

    results = asyncio.run(_run_cells(config, cells))

    manifest = RunManifest(
        config_hash=config_hash(config),
        experiment=config.experiment,
        allow_divergence_study=config.allow_divergence_study,
        cells=results,
    )
    write_summary(run_dir, build_summary(run_dir, manifest))
    manifest.files = sorted({name for cell in results for name in cell.files} | {SUMMARY_NAME})
    write_manifest(run_dir, manifest)

    counts = manifest.status_counts()
    logger.info(
        f"✅ 실험 종료: completed={counts['completed']}, diverged={counts['diverged']}, failed={counts['failed']}"
    )
    return manifest


def exit_code_for(manifest: RunManifest) -> int:
    """실패 셀이 있으면 1 (발산 연구 플래그가 없으면 발산도 실패로 본다)"""
    counts = manifest.status_counts()
    if counts["failed"]:
        return EXIT_CELL_FAILURE
    if counts["diverged"] and not manifest.allow_divergence_study:
        return EXIT_CELL_FAILURE
    return EXIT_OK
