"""
Agent 모듈 유틸리티 함수
실행 시간 추적
"""
import logging
import time
from functools import wraps
from typing import Callable, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def track_execution_time(name: str):
    """
    실행 시간을 추적하는 데코레이터

    Args:
        name: 작업 이름 (로깅용)

    Usage:
        @track_execution_time("train_run")
        def train_run(...) -> TrainResult:
            ...
    """
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            start_time = time.time()
            try:
                result = func(*args, **kwargs)
                elapsed_time = time.time() - start_time
                logger.info(f"====== ⏱️ [{name}] 실행 시간: {elapsed_time:.3f}초 ({elapsed_time*1000:.2f}ms) ⏱️ =======")
                return result
            except Exception as e:
                elapsed_time = time.time() - start_time
                logger.error(f"====== ⏱️ [{name}] 실행 시간: {elapsed_time:.3f}초 (에러 발생: {str(e)}) ⏱️ =======")
                raise
        return wrapper
    return decorator
