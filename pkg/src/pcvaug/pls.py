"""SIMPLS for a single response."""

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeMismatch, ZeroYLoading
from .matrix import as_matrix

ZERO_LOADING = 1e-14
COLLAPSE_TOL = 1e-12


@dataclass(frozen=True)
class PlsModel:
    """PLS1 decomposition of preprocessed data.

    W : (J, A) unit-norm weights
    P : (J, A) x-loadings
    c : (A,) y-loadings

    Scores are T = X @ W. In exact arithmetic P'W = I, but on ill-conditioned
    data it drifts (1e-5 is not unusual for spectra), so predictions go
    through R = W (P'W)^-1 which keeps P'R = I to rounding.
    """

    W: np.ndarray
    P: np.ndarray
    c: np.ndarray

    @property
    def ncomp(self):
        return self.W.shape[1]

    def rotations(self, ncomp=None):
        a = self.ncomp if ncomp is None else ncomp
        W = self.W[:, :a]
        return W @ np.linalg.inv(self.P[:, :a].T @ W)

    def scores(self, X, ncomp=None):
        a = self.ncomp if ncomp is None else ncomp
        return X @ self.W[:, :a]

    def predict(self, X, ncomp=None):
        return X @ self.coefficients(ncomp)

    def coefficients(self, ncomp=None):
        a = self.ncomp if ncomp is None else ncomp
        return self.rotations(a) @ self.c[:a]


def simpls_fit(X, y, ncomp):
    """Fit `ncomp` SIMPLS components to centered `X` and centered `y`.

    Weights are deflated against an orthonormal basis of the previous
    x-loadings, which makes the scores mutually orthogonal.
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    nrows, ncols = X.shape
    if y.shape[0] != nrows:
        raise ShapeMismatch(f"X has {nrows} rows but y has {y.shape[0]}")
    if not 1 <= ncomp <= min(nrows - 1, ncols):
        raise ValueError(f"ncomp must be in [1, {min(nrows - 1, ncols)}], got {ncomp}")

    W = np.zeros((ncols, ncomp))
    P = np.zeros((ncols, ncomp))
    c = np.zeros(ncomp)
    basis = np.zeros((ncols, ncomp))

    s = X.T @ y
    s0 = np.linalg.norm(s)
    xnorm = np.linalg.norm(X)
    if s0 == 0:
        raise RankDeficient(1)
    for a in range(ncomp):
        snorm = np.linalg.norm(s)
        if snorm <= COLLAPSE_TOL * s0:
            raise RankDeficient(a + 1)
        r = s / snorm
        t = X @ r
        tt = t @ t
        if tt <= (COLLAPSE_TOL * xnorm) ** 2:
            raise RankDeficient(a + 1)
        p = X.T @ t / tt
        ca = (y @ t) / tt
        if abs(ca) < ZERO_LOADING:
            raise ZeroYLoading(a + 1)
        v = p.copy()
        for _ in range(2):
            v -= basis[:, :a] @ (basis[:, :a].T @ v)
        v /= np.linalg.norm(v)
        s = s - v * (v @ s)
        W[:, a], P[:, a], c[a], basis[:, a] = r, p, ca, v
    return PlsModel(W=W, P=P, c=c)
