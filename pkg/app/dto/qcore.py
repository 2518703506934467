"""
전이(Transition) 및 hindsight 학습 설정 DTO
"""
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Tuple
import math
import numpy as np

from app.core.config import settings


class Transition(BaseModel):
    """버퍼에 저장되는 하나의 경험 (행동 시점의 Q(s_j, a_j; θ_j) 포함)"""
    model_config = ConfigDict(frozen=True)

    state: Tuple[float, ...]
    next_state: Tuple[float, ...]
    action: int = Field(..., ge=0)
    reward: float
    terminal: bool
    behavior_q: float

    @field_validator("behavior_q")
    @classmethod
    def validate_behavior_q(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("behavior_q는 유한해야 합니다.")
        return v


class TransitionBatch(BaseModel):
    """미니배치 (배열 형태)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: np.ndarray        # (B, d)
    next_states: np.ndarray   # (B, d)
    actions: np.ndarray       # (B,) int64
    rewards: np.ndarray       # (B,)
    terminals: np.ndarray     # (B,) bool
    behavior_q: np.ndarray    # (B,)

    @classmethod
    def from_transitions(cls, transitions) -> "TransitionBatch":
        return cls(
            states=np.array([t.state for t in transitions], dtype=np.float64),
            next_states=np.array([t.next_state for t in transitions], dtype=np.float64),
            actions=np.array([t.action for t in transitions], dtype=np.int64),
            rewards=np.array([t.reward for t in transitions], dtype=np.float64),
            terminals=np.array([t.terminal for t in transitions], dtype=bool),
            behavior_q=np.array([t.behavior_q for t in transitions], dtype=np.float64),
        )

    def __len__(self) -> int:
        return int(self.actions.shape[0])


class HindsightConfig(BaseModel):
    """hindsight 학습 설정 (δ, γ, α, 타깃 동기화 주기, ε 스케줄, 배치, 버퍼)"""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(1.0, description="hindsight 계수 δ")
    gamma: float = Field(default_factory=lambda: settings.DEFAULT_GAMMA, ge=0.0, le=1.0)
    alpha: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA, ge=0.0, description="스텝 크기 α")
    target_sync_period: int = Field(default_factory=lambda: settings.DEFAULT_TARGET_SYNC_PERIOD, gt=0)
    epsilon_start: float = Field(default_factory=lambda: settings.EPSILON_START, ge=0.0, le=1.0)
    epsilon_end: float = Field(default_factory=lambda: settings.EPSILON_END, ge=0.0, le=1.0)
    epsilon_decay_steps: int = Field(default_factory=lambda: settings.EPSILON_DECAY_STEPS, ge=0)
    batch_size: int = Field(default_factory=lambda: settings.DEFAULT_BATCH_SIZE, gt=0)
    buffer_capacity: int = Field(default_factory=lambda: settings.DEFAULT_BUFFER_CAPACITY, gt=0)
    lr_half_mode: bool = Field(False, description="hindsight 항 없이 α/(1+δ)로 학습하는 기준선")
    allow_divergence_study: bool = Field(False, description="음수 δ 허용 (발산 연구)")
    q_ceiling: float = Field(default_factory=lambda: settings.Q_CEILING, gt=0.0)

    @model_validator(mode="after")
    def validate_delta(self) -> "HindsightConfig":
        if not self.delta > -1.0:
            raise ValueError(f"delta는 −1보다 커야 합니다: {self.delta}")
        if self.delta < 0.0 and not self.allow_divergence_study:
            raise ValueError(
                f"음수 delta({self.delta})는 allow_divergence_study가 설정된 경우에만 허용됩니다."
            )
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch_size가 buffer_capacity보다 클 수 없습니다.")
        return self

    @property
    def is_divergence_study(self) -> bool:
        return self.delta < 0.0
