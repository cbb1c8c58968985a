"""Input validation helpers shared by the estimators and order checks."""

import numpy as np
from sklearn.utils import check_array


def as_sample(x, min_size=2, name="sample"):
    """Return ``x`` as a finite 1-D float array with at least ``min_size`` entries."""
    arr = check_array(x, ensure_2d=False, dtype=float, ensure_all_finite=True,
                      input_name=name)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
        arr = arr[:, 0]
    if arr.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} values, got {arr.size}")
    return arr


def as_matrix(x, name="sample"):
    """Return ``x`` as a finite 2-D float array (rows are observations)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return check_array(arr, dtype=float, ensure_all_finite=True, input_name=name)


def as_probabilities(probs, size, tol=1e-12):
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (size,):
        raise ValueError(f"expected {size} probabilities, got shape {probs.shape}")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise ValueError("probabilities must be finite and nonnegative")
    total = probs.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    return probs
