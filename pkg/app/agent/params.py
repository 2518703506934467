"""
파라미터 저장소 (θ, θ⁻) 및 듀얼링 헤드 파라미터
"""
from typing import List, Tuple
import numpy as np

from app.core.exceptions import ContractViolation
from app.dto.approx import MLPSpec


class ParamVector:
    """
    평탄화된 파라미터 벡터

    레이아웃: 레이어 l은 [W_l | b_l] (out × (in+1)) 행 우선으로 저장.
    index(layer, row, col)에서 col == in 이면 편향.
    단일 writer 규약: 소유한 trainer만 값을 수정한다.
    """

    def __init__(self, spec: MLPSpec, values: np.ndarray | None = None):
        self.spec = spec
        self._offsets = self._build_offsets(spec)
        if values is None:
            values = np.zeros(spec.param_count, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (spec.param_count,):
            raise ContractViolation(
                f"파라미터 길이({values.shape})가 구조의 파라미터 수({spec.param_count})와 다릅니다."
            )
        self.values = values

    @staticmethod
    def _build_offsets(spec: MLPSpec) -> List[int]:
        offsets = [0]
        for in_w, out_w in zip(spec.layer_widths[:-1], spec.layer_widths[1:]):
            offsets.append(offsets[-1] + out_w * (in_w + 1))
        return offsets

    def index(self, layer: int, row: int, col: int) -> int:
        """(layer, row, col) → 평탄 인덱스"""
        in_w = self.spec.layer_widths[layer]
        out_w = self.spec.layer_widths[layer + 1]
        if not (0 <= row < out_w and 0 <= col <= in_w):
            raise ContractViolation(f"레이어 {layer}의 범위를 벗어난 인덱스: ({row}, {col})")
        return self._offsets[layer] + row * (in_w + 1) + col

    def position(self, flat_index: int) -> Tuple[int, int, int]:
        """평탄 인덱스 → (layer, row, col)"""
        if not 0 <= flat_index < self.spec.param_count:
            raise ContractViolation(f"범위를 벗어난 평탄 인덱스: {flat_index}")
        layer = int(np.searchsorted(self._offsets, flat_index, side="right")) - 1
        local = flat_index - self._offsets[layer]
        row, col = divmod(local, self.spec.layer_widths[layer] + 1)
        return layer, row, col

    def block(self, layer: int) -> np.ndarray:
        """레이어의 [W | b] 뷰 (복사 아님)"""
        in_w = self.spec.layer_widths[layer]
        out_w = self.spec.layer_widths[layer + 1]
        return self.values[self._offsets[layer]:self._offsets[layer + 1]].reshape(out_w, in_w + 1)

    def layer_views(self, layer: int) -> Tuple[np.ndarray, np.ndarray]:
        """(W, b) 뷰"""
        blk = self.block(layer)
        return blk[:, :-1], blk[:, -1]

    def copy(self) -> "ParamVector":
        return ParamVector(self.spec, self.values.copy())

    def load_from(self, other: "ParamVector") -> None:
        """other의 값을 그대로 복사 (레이아웃이 같아야 함)"""
        if not isinstance(other, ParamVector) or other.spec != self.spec:
            raise ContractViolation("파라미터 레이아웃이 일치하지 않습니다.")
        self.values[:] = other.values

    def add_scaled(self, step: float, grad: "ParamVector") -> None:
        """θ ← θ + step·grad"""
        self.values += step * grad.values

    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def zeros_like(self) -> "ParamVector":
        return ParamVector(self.spec)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __repr__(self) -> str:
        return f"ParamVector(widths={self.spec.layer_widths}, n={len(self)})"


def init_params(spec: MLPSpec, rng: np.random.Generator) -> ParamVector:
    """균등분포 [−1/√fan_in, +1/√fan_in] 초기화 (편향 포함)"""
    params = ParamVector(spec)
    for layer in range(spec.n_layers):
        bound = 1.0 / np.sqrt(spec.layer_widths[layer])
        blk = params.block(layer)
        blk[:] = rng.uniform(-bound, bound, size=blk.shape)
    return params


class DuelingHead:
    """
    듀얼링 구조의 파라미터 묶음
    shared (θ) → advantage (α), value (β)
    """

    def __init__(self, shared: ParamVector, advantage: ParamVector, value: ParamVector):
        if value.spec.output_width != 1:
            raise ContractViolation("value 스트림의 출력 폭은 1이어야 합니다.")
        if shared.spec.output_width != advantage.spec.input_width or \
                shared.spec.output_width != value.spec.input_width:
            raise ContractViolation("공유 trunk 출력 폭과 헤드 입력 폭이 다릅니다.")
        self.shared_params = shared
        self.advantage_params = advantage
        self.value_params = value

    @property
    def parts(self) -> Tuple[ParamVector, ParamVector, ParamVector]:
        return self.shared_params, self.advantage_params, self.value_params

    def copy(self) -> "DuelingHead":
        return DuelingHead(*(p.copy() for p in self.parts))

    def load_from(self, other: "DuelingHead") -> None:
        if not isinstance(other, DuelingHead):
            raise ContractViolation("파라미터 레이아웃이 일치하지 않습니다.")
        for mine, theirs in zip(self.parts, other.parts):
            mine.load_from(theirs)

    def add_scaled(self, step: float, grad: "DuelingHead") -> None:
        for mine, g in zip(self.parts, grad.parts):
            mine.add_scaled(step, g)

    def all_finite(self) -> bool:
        return all(p.all_finite() for p in self.parts)

    @property
    def values(self) -> np.ndarray:
        """세 스트림을 이어 붙인 복사본 (궤적 비교용)"""
        return np.concatenate([p.values for p in self.parts])

    def __repr__(self) -> str:
        return f"DuelingHead(shared={self.shared_params}, adv={self.advantage_params}, value={self.value_params})"
