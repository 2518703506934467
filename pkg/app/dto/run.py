"""
실험 실행 관련 DTO (실행 설정, 셀, 결과, 매니페스트)
"""
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional

from app.core.config import settings
from app.dto.approx import Activation
from app.dto.envs import EnvSpec, TrueValue
from app.dto.overest import OverestMethod
from app.dto.trainer import BaseMethod

ARTIFACT_VERSION = "1.0.0"

Experiment = Literal["train", "overest", "noise_bound", "delta_sweep"]
CellKind = Literal["train", "overest", "noise"]
CellStatus = Literal["completed", "diverged", "failed"]


class VariantSpec(BaseModel):
    """학습 변형 (base + hindsight 여부 + lr_half 기준선)"""
    model_config = ConfigDict(extra="forbid")

    base: BaseMethod
    hindsight: bool = True
    lr_half_mode: bool = False

    @model_validator(mode="after")
    def check_modes(self) -> "VariantSpec":
        if self.hindsight and self.lr_half_mode:
            raise ValueError("lr_half_mode는 hindsight: false 인 변형에서만 사용할 수 있습니다.")
        return self

    @property
    def label(self) -> str:
        if self.hindsight:
            return f"{self.base}-h"
        if self.lr_half_mode:
            return f"{self.base}-half"
        return self.base

    @property
    def uses_delta(self) -> bool:
        return self.hindsight or self.lr_half_mode


class AgentSpec(BaseModel):
    """학습 하이퍼파라미터 (기본값은 settings)"""
    model_config = ConfigDict(extra="forbid")

    gamma: float = Field(default_factory=lambda: settings.DEFAULT_GAMMA, ge=0.0, le=1.0)
    alpha: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA, ge=0.0)
    batch_size: int = Field(default_factory=lambda: settings.DEFAULT_BATCH_SIZE, gt=0)
    buffer_capacity: int = Field(default_factory=lambda: settings.DEFAULT_BUFFER_CAPACITY, gt=0)
    target_sync_period: int = Field(default_factory=lambda: settings.DEFAULT_TARGET_SYNC_PERIOD, gt=0)
    epsilon_start: float = Field(default_factory=lambda: settings.EPSILON_START, ge=0.0, le=1.0)
    epsilon_end: float = Field(default_factory=lambda: settings.EPSILON_END, ge=0.0, le=1.0)
    epsilon_decay_steps: int = Field(default_factory=lambda: settings.EPSILON_DECAY_STEPS, ge=0)
    q_ceiling: float = Field(default_factory=lambda: settings.Q_CEILING, gt=0.0)
    hidden_widths: List[int] = Field(default_factory=lambda: list(settings.HIDDEN_WIDTHS))
    activation: Activation = Field(default_factory=lambda: settings.HIDDEN_ACTIVATION)

    @field_validator("hidden_widths")
    @classmethod
    def validate_widths(cls, v: List[int]) -> List[int]:
        if any(w <= 0 for w in v):
            raise ValueError("은닉층 폭은 양의 정수여야 합니다.")
        return v


class OverestSpec(BaseModel):
    """함수 추정 실험 설정"""
    model_config = ConfigDict(extra="forbid")

    true_value: TrueValue = "sine"
    methods: List[OverestMethod] = Field(default_factory=lambda: ["dqn", "ddqn", "dqn_h", "ddqn_h"], min_length=1)
    delta: float = Field(1.0, gt=-1.0)
    degree: int = Field(default_factory=lambda: settings.POLY_DEGREE, ge=0)
    gamma: float = Field(default_factory=lambda: settings.OVEREST_GAMMA, ge=0.0, le=1.0)


class NoiseSpec(BaseModel):
    """노이즈 경계 실험 설정"""
    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(1.0, ge=0.0)
    m: int = Field(10, ge=1)
    gamma: float = Field(1.0, ge=0.0, le=1.0)


class RunConfig(BaseModel):
    """실험 실행 설정 (YAML 파일 + CLI 덮어쓰기)"""
    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    seeds: List[int] = Field(..., min_length=1)
    env: EnvSpec = Field(default_factory=EnvSpec)
    variants: List[VariantSpec] = Field(default_factory=lambda: [VariantSpec(base="dqn")])
    deltas: List[float] = Field(default_factory=lambda: [1.0])
    agent: AgentSpec = Field(default_factory=AgentSpec)
    frames: int = Field(10_000, gt=0)
    eval_interval: int = Field(1_000, ge=0)
    eval_episodes: int = Field(default_factory=lambda: settings.EVAL_EPISODES, gt=0)
    overest: OverestSpec = Field(default_factory=OverestSpec)
    rounds: int = Field(default_factory=lambda: settings.OVEREST_ROUNDS, ge=1)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    trials: int = Field(1_000_000, ge=1)
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    jobs: int = Field(default_factory=lambda: settings.MAX_JOBS, ge=1)
    allow_divergence_study: bool = False

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: List[int]) -> List[int]:
        if len(set(v)) != len(v):
            raise ValueError("seeds에 중복이 있습니다.")
        return v

    @model_validator(mode="after")
    def validate_deltas(self) -> "RunConfig":
        if not self.deltas:
            raise ValueError("deltas가 비어 있습니다.")
        for d in self.deltas:
            if not d > -1.0:
                raise ValueError(f"delta는 −1보다 커야 합니다: {d}")
            if d < 0.0 and not self.allow_divergence_study:
                raise ValueError(f"음수 delta({d})는 allow_divergence_study가 필요합니다.")
        if self.overest.delta < 0.0 and not self.allow_divergence_study:
            raise ValueError(f"음수 overest.delta({self.overest.delta})는 allow_divergence_study가 필요합니다.")
        if self.agent.batch_size > self.agent.buffer_capacity:
            raise ValueError("agent.batch_size가 agent.buffer_capacity보다 클 수 없습니다.")
        return self

    @property
    def is_training(self) -> bool:
        return self.experiment in ("train", "delta_sweep")


class CellSpec(BaseModel):
    """독립 실행 단위 하나 (variant/method, δ, seed)"""
    cell_id: str
    kind: CellKind
    seed: int
    delta: float = 0.0
    variant: Optional[VariantSpec] = None
    method: Optional[OverestMethod] = None

    @property
    def label(self) -> str:
        if self.variant is not None:
            return self.variant.label
        return self.method or "noise"


class CellResult(BaseModel):
    """셀 실행 결과 (코디네이터로 전달)"""
    cell_id: str
    label: str = Field("", description="variant 또는 method 이름")
    seed: int = 0
    delta: float = 0.0
    status: CellStatus
    files: List[str] = Field(default_factory=list)
    diverged_frame: Optional[int] = None
    reason: Optional[str] = None


class RunManifest(BaseModel):
    """실행 디렉토리 인덱스"""
    config_hash: str
    artifact_version: str = ARTIFACT_VERSION
    experiment: Experiment
    allow_divergence_study: bool = False
    cells: List[CellResult] = Field(default_factory=list)
    files: List[str] = Field(default_factory=list)

    def status_counts(self) -> Dict[str, int]:
        counts = {"completed": 0, "diverged": 0, "failed": 0}
        for cell in self.cells:
            counts[cell.status] += 1
        return counts
