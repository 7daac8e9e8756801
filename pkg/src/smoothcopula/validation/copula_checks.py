import itertools
from typing import Callable, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel

from smoothcopula.estimation.estimators import EstimatorHandle, margin_defect
from smoothcopula.models.copula_models import CopulaModel, model_cdf
from smoothcopula.shared.rng import make_generator
from smoothcopula.shared.utils.logger import SmoothCopulaLogger

VOLUME_TOLERANCE = -1e-10


class CopulaCheckReport(BaseModel):
    """Outcome of the genuine-copula checks"""

    grounded: bool
    unit_value: float
    margin_defect: float
    min_box_volume: float
    n_boxes: int


def _as_function(target: Union[EstimatorHandle, CopulaModel]) -> Tuple[Callable[[np.ndarray], np.ndarray], int]:
    if isinstance(target, CopulaModel):
        return (lambda points: np.asarray(model_cdf(target, points))), target.d
    return (lambda points: np.asarray(target.evaluate(points))), target.d


def box_volumes(function: Callable[[np.ndarray], np.ndarray], lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """
    C-volumes of the boxes (lower_k, upper_k] by inclusion-exclusion over the 2^d vertices.

    Args:
        function: vectorized distribution function on points of shape (K, d)
        lower: lower corners, shape (K, d)
        upper: upper corners, shape (K, d)
    """
    d = lower.shape[1]
    volumes = np.zeros(lower.shape[0])
    for vertex in itertools.product((False, True), repeat=d):
        chosen = np.array(vertex)
        corners = np.where(chosen, lower, upper)
        volumes += (-1) ** int(chosen.sum()) * function(corners)
    return volumes


def check_genuine_copula(
    target: Union[EstimatorHandle, CopulaModel],
    n_boxes: int = 1000,
    seed: int = 0,
    grid_size: int = 11,
    margin_tolerance: Optional[float] = 1e-12,
    logger: Optional[SmoothCopulaLogger] = None,
) -> Tuple[bool, CopulaCheckReport]:
    """
    Check groundedness, C(1, ..., 1) = 1, uniform margins and d-increasingness.

    Args:
        target: estimator handle or parametric model
        n_boxes: random boxes used for the volume check
        seed: seed of the box generator
        grid_size: grid size of the margin check
        margin_tolerance: allowed margin defect; None skips the margin check
        logger: Optional logger

    Returns:
        Tuple of (is_copula, report)
    """
    logger = logger or SmoothCopulaLogger("copula_checks")
    function, d = _as_function(target)
    rng = make_generator(seed)

    # Points with one zero coordinate
    anchors = rng.random((64, d))
    anchors[np.arange(64), rng.integers(0, d, 64)] = 0.0
    grounded = bool(np.all(np.abs(function(anchors)) <= 1e-15))
    unit_value = float(np.atleast_1d(function(np.ones((1, d))))[0])

    if isinstance(target, CopulaModel):
        grid = np.linspace(0.0, 1.0, grid_size)
        defect = 0.0
        for j in range(d):
            points = np.ones((grid_size, d))
            points[:, j] = grid
            defect = max(defect, float(np.max(np.abs(function(points) - grid))))
    else:
        defect = margin_defect(target, grid_size)

    corners = rng.random((n_boxes, 2, d))
    lower, upper = corners.min(axis=1), corners.max(axis=1)
    min_volume = float(np.min(box_volumes(function, lower, upper)))

    report = CopulaCheckReport(grounded=grounded, unit_value=unit_value, margin_defect=defect,
                               min_box_volume=min_volume, n_boxes=n_boxes)
    is_copula = (grounded and abs(unit_value - 1.0) <= 1e-12 and min_volume >= VOLUME_TOLERANCE
                 and (margin_tolerance is None or defect <= margin_tolerance))

    if is_copula:
        logger.debug("✅ Genuine copula checks passed")
    else:
        logger.warning(f"⚠️ Genuine copula checks failed: {report.model_dump()}")
    return is_copula, report
