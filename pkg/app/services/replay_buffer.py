"""
행동 시점 Q값을 함께 저장하는 경험 재생 버퍼
"""
from typing import List, Optional
import logging
import numpy as np

from app.core.exceptions import BufferNotReadyError, ContractViolation
from app.dto.qcore import Transition, TransitionBatch

logger = logging.getLogger(__name__)


class HindsightBuffer:
    """
    고정 용량 링 버퍼 (가장 오래된 항목부터 제거)

    (s_j, s_{j+1}, a_j, Q(s_j, a_j; θ_j), r_j) 를 저장하고
    시드 고정 생성기로 복원 추출한다. 학습 스레드 단일 writer.
    """

    def __init__(self, capacity: int, rng_seed: int | np.random.SeedSequence = 0):
        if capacity <= 0:
            raise ContractViolation(f"capacity는 양의 정수여야 합니다: {capacity}")
        self.capacity = capacity
        self.rng_seed = rng_seed
        self._rng = np.random.default_rng(rng_seed)
        self._size = 0
        self._cursor = 0
        # 첫 push 시 상태 차원에 맞춰 할당
        self._states: Optional[np.ndarray] = None
        self._next_states: Optional[np.ndarray] = None
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity, dtype=np.float64)
        self._terminals = np.zeros(capacity, dtype=bool)
        self._behavior_q = np.zeros(capacity, dtype=np.float64)

    def __len__(self) -> int:
        return self._size

    def _allocate(self, dim: int) -> None:
        self._states = np.zeros((self.capacity, dim), dtype=np.float64)
        self._next_states = np.zeros((self.capacity, dim), dtype=np.float64)

    def push(self, t: Transition) -> "HindsightBuffer":
        """t를 최신 항목으로 저장 (가득 차면 가장 오래된 항목 제거)"""
        if self._states is None:
            self._allocate(len(t.state))
        elif len(t.state) != self._states.shape[1] or len(t.next_state) != self._states.shape[1]:
            raise ContractViolation("상태 차원이 버퍼의 차원과 다릅니다.")

        i = self._cursor
        self._states[i] = t.state
        self._next_states[i] = t.next_state
        self._actions[i] = t.action
        self._rewards[i] = t.reward
        self._terminals[i] = t.terminal
        self._behavior_q[i] = t.behavior_q

        self._cursor = (self._cursor + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)
        return self

    def _slots_oldest_first(self) -> np.ndarray:
        return (self._cursor - self._size + np.arange(self._size)) % self.capacity

    def _transition_at(self, slot: int) -> Transition:
        return Transition(
            state=tuple(self._states[slot].tolist()),
            next_state=tuple(self._next_states[slot].tolist()),
            action=int(self._actions[slot]),
            reward=float(self._rewards[slot]),
            terminal=bool(self._terminals[slot]),
            behavior_q=float(self._behavior_q[slot]),
        )

    def entries(self) -> List[Transition]:
        """저장된 전이 (오래된 것부터)"""
        return [self._transition_at(int(slot)) for slot in self._slots_oldest_first()]

    def sample_slots(self, n: int) -> np.ndarray:
        """균등 복원 추출 슬롯"""
        if n <= 0:
            raise ContractViolation(f"n은 양의 정수여야 합니다: {n}")
        if self._size == 0:
            raise BufferNotReadyError("빈 버퍼에서는 추출할 수 없습니다.")
        return self._rng.integers(0, self._size, size=n)

    def sample(self, n: int) -> List[Transition]:
        """n개 전이를 균등 복원 추출"""
        return [self._transition_at(int(slot)) for slot in self.sample_slots(n)]

    def sample_batch(self, n: int) -> TransitionBatch:
        """sample과 같은 추출 규칙의 배열 형태 미니배치"""
        slots = self.sample_slots(n)
        return TransitionBatch(
            states=self._states[slots],
            next_states=self._next_states[slots],
            actions=self._actions[slots],
            rewards=self._rewards[slots],
            terminals=self._terminals[slots],
            behavior_q=self._behavior_q[slots],
        )

    def reset_rng(self) -> None:
        """생성기를 초기 시드로 되돌림"""
        self._rng = np.random.default_rng(self.rng_seed)
