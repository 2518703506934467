"""
TaskIQ Worker Tasks
실험 셀 실행 작업 정의
"""
import logging
from typing import Any, Dict

from taskiq import AsyncBroker

from app.dto.run import CellResult, CellSpec, RunConfig
from app.services.cell_service import execute_cell

logger = logging.getLogger(__name__)

CELL_TASK_NAME = "run_cell_task"


def run_cell_task(config: Dict[str, Any], cell: Dict[str, Any]) -> Dict[str, Any]:
    """
    셀 하나를 실행하고 결과를 dict로 반환 (예외는 failed로 보고)

    Args:
        config: RunConfig.model_dump(mode="json")
        cell: CellSpec.model_dump(mode="json")
    """
    spec = CellSpec.model_validate(cell)
    logger.info(f"🚀 셀 실행 시작: {spec.cell_id}")
    try:
        result = execute_cell(RunConfig.model_validate(config), spec)
        logger.info(f"✅ 셀 실행 종료: {spec.cell_id} ({result.status})")
        return result.model_dump(mode="json")
    except Exception as e:
        logger.error(f"셀 처리 중 오류 발생: {spec.cell_id} ({e})")
        return CellResult(
            cell_id=spec.cell_id,
            label=spec.label,
            seed=spec.seed,
            delta=spec.delta,
            status="failed",
            reason=str(e),
        ).model_dump(mode="json")


def register_cell_task(broker: AsyncBroker):
    """브로커에 셀 태스크 등록"""
    return broker.register_task(run_cell_task, task_name=CELL_TASK_NAME)
