"""
환경변수 로드 (.env)
"""
from pydantic_settings import BaseSettings
from typing import List
import logging

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """애플리케이션 설정"""

    # 학습 기본 하이퍼파라미터 (데스크 스케일)
    DEFAULT_GAMMA: float = 0.99
    DEFAULT_ALPHA: float = 1e-3
    DEFAULT_BATCH_SIZE: int = 32
    DEFAULT_BUFFER_CAPACITY: int = 10_000
    DEFAULT_TARGET_SYNC_PERIOD: int = 500  # 프레임 단위

    # ε-greedy 스케줄
    EPSILON_START: float = 1.0
    EPSILON_END: float = 0.05
    EPSILON_DECAY_STEPS: int = 10_000

    # 발산 감지 (|Q| 상한)
    Q_CEILING: float = 1e6

    # 평가 설정
    EVAL_EPSILON: float = 0.001
    EVAL_EPISODES: int = 10
    MAX_EPISODE_STEPS: int = 200

    # 근사기 설정
    HIDDEN_WIDTHS: List[int] = []  # 비어 있으면 one-hot 선형 (테이블 등가)
    HIDDEN_ACTIVATION: str = "relu"  # "relu", "tanh", 또는 "identity"

    # 과대추정 실험 설정
    POLY_DEGREE: int = 6
    OVEREST_ROUNDS: int = 20
    OVEREST_GAMMA: float = 0.9

    # 가치 반복 오라클
    VALUE_ITERATION_TOLERANCE: float = 1e-10
    VALUE_ITERATION_MAX_ITERATIONS: int = 100_000

    # 몬테카를로 (메모리 절약용 청크 크기)
    NOISE_MC_CHUNK: int = 100_000

    # 실행기 설정
    OUTPUT_DIR: str = "runs"
    MAX_JOBS: int = 4

    # 환경 설정
    DEBUG: bool = True

    class Config:
        env_file = ".env"
        case_sensitive = True


settings = Settings()
