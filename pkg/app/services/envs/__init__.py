"""
학습 환경 모듈
"""
from app.services.envs.base import BaseEnv
from app.services.envs.tabular import TabularEnv

__all__ = ["BaseEnv", "TabularEnv"]
