"""
학습 환경 기본 클래스 (확장 가능한 구조)
"""
from abc import ABC, abstractmethod
from typing import Tuple
import logging
import numpy as np

logger = logging.getLogger(__name__)


class BaseEnv(ABC):
    """이산 행동 학습 환경 기본 클래스"""

    name: str = "base"

    @property
    @abstractmethod
    def n_actions(self) -> int:
        """행동 개수"""
        pass

    @property
    @abstractmethod
    def obs_dim(self) -> int:
        """관측 벡터 차원"""
        pass

    @abstractmethod
    def reset(self) -> int:
        """에피소드 시작 상태"""
        pass

    @abstractmethod
    def step(self, state: int, action: int, rng: np.random.Generator) -> Tuple[int, float, bool]:
        """
        한 스텝 전이 (순수 함수: 같은 state, action, rng 상태면 같은 결과)

        Args:
            state: 현재 상태
            action: 행동 인덱스
            rng: 전이 추출용 생성기

        Returns:
            (다음 상태, 보상, 종료 여부)
        """
        pass

    @abstractmethod
    def observe(self, state: int) -> np.ndarray:
        """상태의 관측 벡터"""
        pass

    def can_step(self, action: int) -> bool:
        """행동 인덱스가 유효한지 확인"""
        return 0 <= action < self.n_actions
