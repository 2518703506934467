"""
학습 실행 관련 DTO (에이전트 변형, 에피소드 통계, 평가 스냅샷, 진단)
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Any, List, Literal, Optional

from app.dto.qcore import HindsightConfig

BaseMethod = Literal["dqn", "ddqn", "duel"]


class AgentVariant(BaseModel):
    """⟨BASE⟩ 또는 ⟨BASE⟩-H 변형"""
    model_config = ConfigDict(frozen=True)

    base: BaseMethod
    hindsight: bool = True
    config: HindsightConfig = Field(default_factory=HindsightConfig)

    @model_validator(mode="after")
    def check_modes(self) -> "AgentVariant":
        if self.hindsight and self.config.lr_half_mode:
            raise ValueError("lr_half_mode는 hindsight가 꺼진 변형에서만 사용할 수 있습니다.")
        return self

    @property
    def label(self) -> str:
        """dqn, dqn-h, dqn-half ..."""
        if self.hindsight:
            return f"{self.base}-h"
        if self.config.lr_half_mode:
            return f"{self.base}-half"
        return self.base


class EpisodeStats(BaseModel):
    """에피소드 하나의 학습 통계"""
    episode: int = Field(..., ge=0)
    episode_return: float
    mean_selected_q: float = Field(..., description="에피소드 동안 선택된 행동의 Q 평균")
    steps: int = Field(..., ge=1)
    epsilon_at_end: float
    frame_index: int = Field(..., ge=0, description="에피소드가 끝난 프레임")


class EvalSnapshot(BaseModel):
    """평가 시점의 탐욕 정책 성능"""
    frame: int
    eval_return: float
    eval_mean_q: float


class TrainDiagnostics(BaseModel):
    """학습 실행 진단"""
    status: Literal["completed", "diverged"] = "completed"
    diverged_frame: Optional[int] = None
    reason: Optional[str] = None
    frames_run: int = 0
    updates: int = 0
    target_syncs: int = 0


class TrainResult(BaseModel):
    """train_run 결과 (최종 파라미터, 에피소드 통계, 평가 스냅샷, 진단)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: Any
    episodes: List[EpisodeStats] = Field(default_factory=list)
    evals: List[EvalSnapshot] = Field(default_factory=list)
    diagnostics: TrainDiagnostics = Field(default_factory=TrainDiagnostics)
