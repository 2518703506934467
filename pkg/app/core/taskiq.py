"""
TaskIQ Broker 설정 (프로세스 내 워커 풀)
"""
from taskiq import InMemoryBroker

from app.core.config import settings


def create_broker(jobs: int | None = None, capacity: int = 100) -> InMemoryBroker:
    """
    실행 단위마다 새 브로커 생성

    Args:
        jobs: 동기 태스크 워커 수 (기본 settings.MAX_JOBS)
        capacity: 보관할 결과 수 (셀 수 이상)

    Returns:
        InMemoryBroker
    """
    return InMemoryBroker(
        sync_tasks_pool_size=jobs or settings.MAX_JOBS,
        max_stored_results=max(capacity, 100),
    )
