"""Evaluable data fields: body force f(x, y) -> (n, 2) and friction threshold g(x, y) -> (n,)."""
import numpy as np
from typing import Callable

from trescashape.exceptions import DataEvaluationException, TrescaShapeException

VectorSource = Callable[[np.ndarray, np.ndarray], np.ndarray]
ScalarSource = Callable[[np.ndarray, np.ndarray], np.ndarray]


def constant_vector(cx: float, cy: float) -> VectorSource:
    def f(x, y):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape + (2,))
        out[..., 0], out[..., 1] = cx, cy
        return out

    return f


def constant_scalar(c: float) -> ScalarSource:
    return lambda x, y: np.full(np.shape(x), float(c))


def evaluate_vector(f: VectorSource, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    try:
        values = np.asarray(f(points[..., 0], points[..., 1]), dtype=float)
    except TrescaShapeException:
        raise
    except Exception as e:
        raise DataEvaluationException(f"evaluating vector field failed: {e}") from e
    if values.shape != points.shape:
        raise DataEvaluationException(f"vector field returned shape {values.shape}, expected {points.shape}")
    if not np.all(np.isfinite(values)):
        raise DataEvaluationException("vector field evaluated to a non-finite value")
    return values


def evaluate_scalar(g: ScalarSource, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    try:
        values = np.asarray(g(points[..., 0], points[..., 1]), dtype=float)
    except TrescaShapeException:
        raise
    except Exception as e:
        raise DataEvaluationException(f"evaluating scalar field failed: {e}") from e
    values = np.broadcast_to(values, points.shape[:-1]).copy()
    if not np.all(np.isfinite(values)):
        raise DataEvaluationException("scalar field evaluated to a non-finite value")
    return values


def scalar_gradient(g: ScalarSource, points: np.ndarray, step: float) -> np.ndarray:
    """Centered differences, (n, 2)."""
    grad = np.empty(np.shape(points))
    for a in range(2):
        e = np.zeros(2)
        e[a] = step
        grad[..., a] = (evaluate_scalar(g, points + e) - evaluate_scalar(g, points - e)) / (2.0 * step)
    return grad


def vector_gradient(f: VectorSource, points: np.ndarray, step: float) -> np.ndarray:
    """Centered differences, (n, 2, 2) with [..., a, b] = ∂f_a/∂x_b."""
    grad = np.empty(np.shape(points)[:-1] + (2, 2))
    for b in range(2):
        e = np.zeros(2)
        e[b] = step
        grad[..., :, b] = (evaluate_vector(f, points + e) - evaluate_vector(f, points - e)) / (2.0 * step)
    return grad


def fd_step(diameter: float) -> float:
    return 1e-6 * diameter
