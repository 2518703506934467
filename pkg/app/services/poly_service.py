"""
다항식 최소제곱 회귀 서비스
"""
from typing import Iterable, Tuple
import logging
import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from app.core.exceptions import ContractViolation, RankDeficientError
from app.dto.approx import PolyRegressor

logger = logging.getLogger(__name__)


def poly_fit(samples: Iterable[Tuple[float, float]], degree: int) -> PolyRegressor:
    """
    Σ(poly(s) − target)² 최소화

    상태를 [−1, 1]로 재스케일한 뒤 Vandermonde 정규 방정식을
    부분 피벗 LU(LAPACK gesv)로 풀고, 원래 좌표의 단항식 계수로 되돌린다.

    Args:
        samples: (state, target) 시퀀스
        degree: 다항식 차수

    Returns:
        PolyRegressor (coefficients[k]는 s^k의 계수)
    """
    if degree < 0:
        raise ContractViolation(f"degree는 0 이상이어야 합니다: {degree}")
    data = np.asarray(list(samples), dtype=np.float64)
    if data.size == 0:
        raise ContractViolation("샘플이 비어 있습니다.")
    states, targets = data[:, 0], data[:, 1]

    n_distinct = np.unique(states).size
    if n_distinct < degree + 1:
        raise RankDeficientError(
            f"서로 다른 상태 수({n_distinct})가 degree+1({degree + 1})보다 적습니다."
        )

    lo, hi = float(states.min()), float(states.max())
    if hi == lo:
        # degree 0, 단일 상태
        center, half_width = lo, 1.0
    else:
        center, half_width = 0.5 * (lo + hi), 0.5 * (hi - lo)
    scaled = (states - center) / half_width

    vander = P.polyvander(scaled, degree)
    normal = vander.T @ vander
    rhs = vander.T @ targets
    try:
        scaled_coef = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as e:
        raise RankDeficientError(f"정규 방정식 풀이 실패: {e}")

    # u = (s − center)/half_width 좌표 → s 좌표
    coef = Polynomial(
        scaled_coef,
        domain=[center - half_width, center + half_width],
        window=[-1.0, 1.0],
    ).convert().coef
    padded = np.zeros(degree + 1)
    padded[:min(coef.size, degree + 1)] = coef[:degree + 1]

    return PolyRegressor(degree=degree, coefficients=padded.tolist())


def poly_eval(model: PolyRegressor, state: float | np.ndarray) -> float | np.ndarray:
    """Horner 방식 평가 (스칼라 또는 배열)"""
    s = np.asarray(state, dtype=np.float64)
    acc = np.zeros_like(s)
    for c in reversed(model.coefficients):
        acc = acc * s + c
    if acc.ndim == 0:
        return float(acc)
    return acc


def sum_squared_residuals(model: PolyRegressor, samples: Iterable[Tuple[float, float]]) -> float:
    """잔차 제곱합"""
    data = np.asarray(list(samples), dtype=np.float64)
    residual = poly_eval(model, data[:, 0]) - data[:, 1]
    return float(np.sum(residual ** 2))
