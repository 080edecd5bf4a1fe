"""Ordinary least squares baseline with a seeded 80/20 split."""

from __future__ import annotations

import numpy as np

RIDGE = 1e-9
MIN_ROWS = 100


class UndefinedR2Error(ValueError):
    pass


def r2_score(y: np.ndarray, pred: np.ndarray) -> float:
    centred = y - y.mean()
    ss_tot = float(centred @ centred)
    if ss_tot == 0.0:
        raise UndefinedR2Error("labels are constant on this split; R^2 is undefined")
    resid = y - pred
    return 1.0 - float(resid @ resid) / ss_tot


def fit_ols(X: np.ndarray, y: np.ndarray, ridge: float = RIDGE) -> np.ndarray:
    """Coefficients (intercept first) from the damped normal equations."""
    A = np.hstack([np.ones((len(X), 1)), X])
    gram = A.T @ A + ridge * np.eye(A.shape[1])
    return np.linalg.solve(gram, A.T @ y)


def predict(coef: np.ndarray, X: np.ndarray) -> np.ndarray:
    return coef[0] + X @ coef[1:]


def ols_fit_eval(X, y, split_seed: int = 0, train_frac: float = 0.8) -> dict:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if len(y) < MIN_ROWS:
        raise ValueError(f"need at least {MIN_ROWS} rows, got {len(y)}")
    if len(np.unique(y)) < 2:
        raise UndefinedR2Error("fewer than 2 distinct labels; R^2 is undefined")
    order = np.random.default_rng(split_seed).permutation(len(y))
    cut = int(round(train_frac * len(y)))
    tr, te = order[:cut], order[cut:]
    coef = fit_ols(X[tr], y[tr])
    return {
        "r2_train": r2_score(y[tr], predict(coef, X[tr])),
        "r2_test": r2_score(y[te], predict(coef, X[te])),
        "n_train": int(len(tr)),
        "n_test": int(len(te)),
    }


def dataset_fit_eval(dataset, feature_set: str, split_seed: int = 0) -> dict:
    return ols_fit_eval(dataset.features(feature_set), dataset.label, split_seed)
