"""Input validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

import numpy as np

Array = np.ndarray


def check_points_array(X, *, expected_dim: int | None = None, name: str = "X") -> Array:
    """Coerce to a finite 2-d float64 array of ambient points."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"{name} must be a nonempty 2-d array of points")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    if expected_dim is not None and X.shape[1] != expected_dim:
        raise ValueError(
            f"{name} has {X.shape[1]} features, expected {expected_dim}"
        )
    return X


def check_vector(x, *, expected_dim: int | None = None, name: str = "x") -> Array:
    """Coerce to a finite 1-d float64 vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    if expected_dim is not None and x.shape[0] != expected_dim:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {expected_dim}")
    return x


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
