"""
환경 관련 DTO (유한 MDP, 함수 추정 환경, 환경 설정)
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Tuple
import numpy as np

from app.core.config import settings


class TabularMDP(BaseModel):
    """정확한 전이/보상 테이블을 가진 유한 MDP ⟨S, A, R, T⟩"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_states: int = Field(..., gt=0)
    n_actions: int = Field(..., gt=0)
    transition: np.ndarray  # (S, A, S) 다음 상태 분포
    reward: np.ndarray      # (S, A)
    terminal: np.ndarray    # (S,) bool
    gamma: float = Field(..., ge=0.0, le=1.0)
    start_state: int = 0

    @model_validator(mode="after")
    def check_tables(self) -> "TabularMDP":
        s, a = self.n_states, self.n_actions
        if self.transition.shape != (s, a, s):
            raise ValueError(f"transition 형상 불일치: {self.transition.shape} != {(s, a, s)}")
        if self.reward.shape != (s, a):
            raise ValueError(f"reward 형상 불일치: {self.reward.shape} != {(s, a)}")
        if self.terminal.shape != (s,):
            raise ValueError(f"terminal 형상 불일치: {self.terminal.shape} != {(s,)}")
        if np.any(self.transition < 0.0):
            raise ValueError("전이 확률은 음수일 수 없습니다.")
        if np.max(np.abs(self.transition.sum(axis=2) - 1.0)) > 1e-12:
            raise ValueError("다음 상태 분포의 합이 1이 아닙니다.")
        if not np.all(np.isfinite(self.reward)):
            raise ValueError("보상은 유한해야 합니다.")
        if not 0 <= self.start_state < s:
            raise ValueError(f"start_state 범위 초과: {self.start_state}")
        return self


TrueValue = Literal["sine", "gaussian"]


def _default_removed_pairs() -> List[Tuple[int, int]]:
    # a_0: (−5, −4), a_1: (−4, −3), ...
    return [(-5 + a, -4 + a) for a in range(10)]


class FunctionEstimationEnv(BaseModel):
    """연속 상태 함수 추정 환경 (모든 행동의 참값이 같음)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_actions: int = 10
    true_value: TrueValue = "sine"
    sample_states: List[int] = Field(default_factory=lambda: list(range(-6, 7)))
    removed_pairs: List[Tuple[int, int]] = Field(default_factory=_default_removed_pairs)
    eval_grid: np.ndarray = Field(default_factory=lambda: np.linspace(-6.0, 6.0, 601))

    @model_validator(mode="after")
    def check_pairs(self) -> "FunctionEstimationEnv":
        if len(self.removed_pairs) != self.n_actions:
            raise ValueError("행동마다 하나의 제거 쌍이 필요합니다.")
        states = set(self.sample_states)
        for lo, hi in self.removed_pairs:
            if hi != lo + 1 or lo not in states or hi not in states:
                raise ValueError(f"제거 쌍은 샘플 격자 내 인접한 정수 상태여야 합니다: {(lo, hi)}")
        return self


class EnvSpec(BaseModel):
    """학습 환경 설정 (실행 설정 파일에서 사용)"""
    kind: Literal["chain", "gridworld"] = "chain"
    n_states: int = Field(10, ge=2, description="chain 길이")
    size: int = Field(4, ge=2, description="gridworld 한 변 길이")
    max_episode_steps: int = Field(default_factory=lambda: settings.MAX_EPISODE_STEPS, gt=0)
