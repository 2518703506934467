"""
유한 MDP 기반 환경 (원-핫 관측)
"""
from typing import Tuple
import logging
import numpy as np

from app.core.exceptions import ContractViolation
from app.dto.envs import TabularMDP
from app.services.envs.base import BaseEnv

logger = logging.getLogger(__name__)


class TabularEnv(BaseEnv):
    """TabularMDP 위의 환경. 관측은 상태의 원-핫 벡터."""

    def __init__(self, mdp: TabularMDP, name: str = "tabular", max_episode_steps: int = 200):
        self.mdp = mdp
        self.name = name
        self.max_episode_steps = max_episode_steps
        self._eye = np.eye(mdp.n_states)

    @property
    def n_actions(self) -> int:
        return self.mdp.n_actions

    @property
    def obs_dim(self) -> int:
        return self.mdp.n_states

    @property
    def n_states(self) -> int:
        return self.mdp.n_states

    def reset(self) -> int:
        return self.mdp.start_state

    def step(self, state: int, action: int, rng: np.random.Generator) -> Tuple[int, float, bool]:
        if not (0 <= state < self.mdp.n_states and self.can_step(action)):
            raise ContractViolation(f"잘못된 상태/행동: state={state}, action={action}")
        dist = self.mdp.transition[state, action]
        # 결정적 전이는 생성기를 소비하지 않음
        if np.count_nonzero(dist) == 1:
            next_state = int(np.flatnonzero(dist)[0])
        else:
            next_state = int(rng.choice(self.mdp.n_states, p=dist))
        reward = float(self.mdp.reward[state, action])
        return next_state, reward, bool(self.mdp.terminal[next_state])

    def observe(self, state: int) -> np.ndarray:
        return self._eye[state].copy()
