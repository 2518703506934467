"""
함수 근사기 관련 DTO
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal
import math

Activation = Literal["relu", "tanh", "identity"]


class PolyRegressor(BaseModel):
    """다항식 회귀기 (coefficients[k]는 s^k의 계수)"""
    model_config = ConfigDict(frozen=True)

    degree: int = Field(..., ge=0)
    coefficients: List[float]

    @model_validator(mode="after")
    def check_coefficients(self) -> "PolyRegressor":
        if len(self.coefficients) != self.degree + 1:
            raise ValueError(
                f"계수 길이({len(self.coefficients)})가 degree+1({self.degree + 1})과 다릅니다."
            )
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("계수에 유한하지 않은 값이 있습니다.")
        return self


class MLPSpec(BaseModel):
    """완전 연결 신경망 구조 (입력 폭이 처음, 출력 폭이 마지막)"""
    model_config = ConfigDict(frozen=True)

    layer_widths: List[int] = Field(..., min_length=2)
    activations: List[Activation] = Field(default_factory=list, description="은닉층별 활성화")
    output_activation: Activation = "identity"

    @model_validator(mode="after")
    def check_layers(self) -> "MLPSpec":
        if any(w <= 0 for w in self.layer_widths):
            raise ValueError("layer_widths는 모두 양의 정수여야 합니다.")
        if len(self.activations) != len(self.layer_widths) - 2:
            raise ValueError(
                f"은닉층 수({len(self.layer_widths) - 2})와 활성화 수({len(self.activations)})가 다릅니다."
            )
        return self

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    @property
    def output_width(self) -> int:
        return self.layer_widths[-1]

    def layer_activation(self, layer: int) -> Activation:
        if layer == self.n_layers - 1:
            return self.output_activation
        return self.activations[layer]

    @property
    def param_count(self) -> int:
        return sum(
            out_w * (in_w + 1)
            for in_w, out_w in zip(self.layer_widths[:-1], self.layer_widths[1:])
        )
