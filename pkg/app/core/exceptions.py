"""
도메인 예외 정의
"""
from typing import List, Optional


class HindsightError(Exception):
    """모든 도메인 예외의 기본 클래스"""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ContractViolation(HindsightError, ValueError):
    """사전 조건 / 형상 위반"""


class RankDeficientError(HindsightError):
    """정규 방정식이 퇴화된 경우 (서로 다른 상태 수 < degree+1)"""


class BufferNotReadyError(HindsightError):
    """버퍼에 샘플링할 만큼의 경험이 없음"""


class ConvergenceError(HindsightError):
    """반복 상한 내에 수렴하지 못함"""


class DivergenceError(HindsightError):
    """학습 발산 (비유한 값 또는 |Q| 상한 초과)"""

    def __init__(self, detail: str, frame: Optional[int] = None):
        super().__init__(detail)
        self.frame = frame


class ConfigError(HindsightError):
    """실행 설정 오류 (path는 문제가 된 키 경로)"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class SummaryError(HindsightError):
    """실행 디렉토리 파일 손상/누락"""

    def __init__(self, problems: List[str]):
        super().__init__("; ".join(problems))
        self.problems = problems
