"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np

from .spectral import Grid, make_grid


def check_fields(X, length: float, x_left: float | None = None) -> tuple[np.ndarray, Grid]:
    """Coerce ``X`` to a finite complex ``(n_samples, n)`` array and build its grid.

    A single 1-D field is promoted to one row.
    """
    arr = np.asarray(X)
    if arr.dtype == object:
        raise ValueError("fields must be numeric arrays")
    arr = arr.astype(np.complex128, copy=True)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of fields, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("need at least one field")
    if not np.all(np.isfinite(arr)):
        raise ValueError("fields contain NaN or infinity")
    return arr, make_grid(arr.shape[1], length, x_left)


def check_n_features(est, X: np.ndarray):
    if X.shape[1] != est.n_features_in_:
        raise ValueError(f"X has {X.shape[1]} grid points, but {type(est).__name__} was fitted with {est.n_features_in_}")
