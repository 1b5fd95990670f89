"""Dense matrix helpers: preprocessing, truncated SVD and the q/h distances.

Matrices are plain 2-D float64 numpy arrays, rows are objects and columns
are variables.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DidNotConverge, ShapeMismatch, ZeroSingularValue, ZeroVarianceColumn


def as_matrix(X, name="X"):
    """Return `X` as a finite 2-D float64 array, raising ValueError otherwise."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return X


@dataclass(frozen=True)
class Preprocessor:
    """Column centering and optional standardization."""

    mean: np.ndarray
    scale: np.ndarray
    standardize: bool = False

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.mean.shape[0]:
            raise ShapeMismatch(
                f"expected {self.mean.shape[0]} columns, got {X.shape[-1]}")
        return (X - self.mean) / self.scale

    def inverse(self, Z):
        Z = np.asarray(Z, dtype=np.float64)
        return Z * self.scale + self.mean


def preprocess_fit(X, standardize=False):
    """Fit column means and, if `standardize`, sample standard deviations."""
    X = as_matrix(X)
    mean = X.mean(axis=0)
    if standardize:
        if X.shape[0] < 2:
            raise ZeroVarianceColumn(0)
        scale = X.std(axis=0, ddof=1)
        # relative tolerance, a constant column gives round-off sized sd
        tol = 1e-12 * np.maximum(np.abs(mean), 1.0)
        bad = np.flatnonzero(scale <= tol)
        if bad.size:
            raise ZeroVarianceColumn(int(bad[0]))
    else:
        scale = np.ones(X.shape[1])
    return Preprocessor(mean=mean, scale=scale, standardize=bool(standardize))


@dataclass(frozen=True)
class SvdBasis:
    """Right singular vectors `V` (J x A) and singular values `sigma`."""

    V: np.ndarray
    sigma: np.ndarray

    @property
    def ncomp(self):
        return self.V.shape[1]

    def truncate(self, a):
        return SvdBasis(self.V[:, :a], self.sigma[:a])


def sign_normalize(V):
    """Flip columns of `V` so the largest-magnitude entry of each is positive."""
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def svd_truncated(X, ncomp):
    """First `ncomp` right singular vectors and singular values of `X`.

    Columns of V are sign-normalized (see `sign_normalize`).
    """
    X = as_matrix(X)
    if not 1 <= ncomp <= min(X.shape):
        raise ValueError(f"ncomp must be in [1, {min(X.shape)}], got {ncomp}")
    try:
        _, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DidNotConverge(str(exc)) from exc
    return SvdBasis(V=sign_normalize(Vt[:ncomp].T), sigma=s[:ncomp].copy())


def eigenvalues(X):
    """Eigenvalues of the covariance of an already centered matrix, sigma^2/(I-1)."""
    X = as_matrix(X)
    s = np.linalg.svd(X, compute_uv=False)
    return s ** 2 / (X.shape[0] - 1)


@dataclass(frozen=True)
class DistancePair:
    q: np.ndarray
    h: np.ndarray


def distances(X, basis, ncomp=None):
    """Squared residual distance q and squared score distance h of rows of `X`.

    q_i is the squared norm of x_i(I - V_a V_a') and h_i the sum of squared
    scores normalized by the singular values, using the first `ncomp`
    components of `basis` (all of them by default).
    """
    X = as_matrix(X)
    a = basis.ncomp if ncomp is None else ncomp
    if not 1 <= a <= basis.ncomp:
        raise ValueError(f"ncomp must be in [1, {basis.ncomp}], got {a}")
    if X.shape[1] != basis.V.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[1]} columns, basis has {basis.V.shape[0]}")
    V = basis.V[:, :a]
    sigma = basis.sigma[:a]
    zero = np.flatnonzero(sigma == 0)
    if zero.size:
        raise ZeroSingularValue(int(zero[0]) + 1)
    T = X @ V
    E = X - T @ V.T
    return DistancePair(q=np.sum(E ** 2, axis=1), h=np.sum((T / sigma) ** 2, axis=1))


def distance_profile(X, basis):
    """q and h for every component count, as two I x A matrices (column a-1 is a)."""
    X = as_matrix(X)
    V, sigma = basis.V, basis.sigma
    if np.any(sigma == 0):
        raise ZeroSingularValue(int(np.flatnonzero(sigma == 0)[0]) + 1)
    T = X @ V
    E = X - T @ V.T
    qA = np.sum(E ** 2, axis=1)
    t2 = T ** 2
    # q_a = q_A + sum of squared scores beyond a
    tail = np.cumsum(t2[:, ::-1], axis=1)[:, ::-1]
    q = qA[:, None] + np.hstack([tail[:, 1:], np.zeros((X.shape[0], 1))])
    h = np.cumsum(t2 / sigma ** 2, axis=1)
    return q, h
