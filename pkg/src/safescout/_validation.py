"""Small input validation helpers shared by the public functions."""
import numpy as np
from sklearn.utils.validation import check_array

SIMPLEX_TOL = 1e-12


def check_open_unit(value, name):
    value = float(value)
    if not (0.0 < value < 1.0) or not np.isfinite(value):
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {value!r}")
    return value


def check_unit(value, name):
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_probabilities(values, name="p", min_length=1):
    arr = check_array(np.asarray(values, dtype=float), ensure_2d=False,
                      ensure_min_samples=min_length, input_name=name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return arr


def check_simplex(values, name="distribution", tol=SIMPLEX_TOL):
    arr = check_probabilities(values, name)
    if abs(arr.sum() - 1.0) > tol:
        raise ValueError(f"{name} must sum to 1 (got {arr.sum()!r})")
    return arr


def check_stochastic(matrix, name="matrix", tol=SIMPLEX_TOL):
    arr = check_array(np.asarray(matrix, dtype=float), input_name=name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if np.any(arr < -tol) or np.any(arr > 1.0 + tol):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    rows = arr.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > tol:
        raise ValueError(f"{name} rows must sum to 1")
    return arr


def check_cell(cell, m):
    if isinstance(cell, (bool, np.bool_)) or int(cell) != cell:
        raise TypeError(f"cell index must be an integer, got {cell!r}")
    cell = int(cell)
    if not 0 <= cell < m:
        raise IndexError(f"cell index {cell} out of range for {m} cells")
    return cell
