"""
과대추정 연구 DTO (편향 곡선, 노이즈 모델, 행동별 회귀 집합)
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional
import numpy as np

from app.dto.approx import PolyRegressor

OverestMethod = Literal["dqn", "ddqn", "dqn_h", "ddqn_h"]


class ActionFits(BaseModel):
    """
    라운드별 행동 회귀 집합

    evaluator가 있으면 이중 추정(선택은 selector, 평가는 evaluator).
    """
    model_config = ConfigDict(frozen=True)

    selector: List[PolyRegressor]
    evaluator: Optional[List[PolyRegressor]] = None
    round: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_sizes(self) -> "ActionFits":
        if not self.selector:
            raise ValueError("selector가 비어 있습니다.")
        if self.evaluator is not None and len(self.evaluator) != len(self.selector):
            raise ValueError("selector와 evaluator의 행동 수가 다릅니다.")
        return self

    @property
    def is_double(self) -> bool:
        return self.evaluator is not None


class BiasCurve(BaseModel):
    """상태별 편향 max_a Q̂(s,a) − max_a Q*(s,a)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: np.ndarray
    bias: np.ndarray
    method_label: str

    @model_validator(mode="after")
    def check_curve(self) -> "BiasCurve":
        if self.grid.shape != self.bias.shape:
            raise ValueError(f"grid/bias 길이 불일치: {self.grid.shape} != {self.bias.shape}")
        if not np.all(np.isfinite(self.bias)):
            raise ValueError("편향 곡선에 유한하지 않은 값이 있습니다.")
        return self


class NoiseModel(BaseModel):
    """[−ε, ε] 균등 노이즈, 행동 m개, 할인율 γ"""
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(..., ge=0.0)
    m: int = Field(..., ge=1)
    gamma: float = Field(1.0, ge=0.0, le=1.0)


class NoiseEstimate(BaseModel):
    """γ·max(노이즈) 몬테카를로 추정"""
    mean: float
    std_error: float
    trials: int
    closed_form: float

    @property
    def relative_error(self) -> float:
        if self.closed_form == 0.0:
            return abs(self.mean)
        return abs(self.mean - self.closed_form) / self.closed_form
