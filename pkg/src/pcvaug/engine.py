"""Generation of Procrustes validation sets (PV-sets).

A PV-set has the shape of the training predictors. Row i of the PV-set is
produced from row i of the training set. The row is projected onto the
local model fitted without its cross-validation segment. The local scores
are then re-expressed in the global model, so the global model sees PV rows
exactly as each local model sees its held-out rows:

* SVD: the q distance (and the h distance when `scale_scores` is on) of a
  PV row under the global model equals that of the source row under the
  local model.
* PLS: the global prediction for a PV row equals the local prediction for
  the source row.

When fewer components than the rank of the data are used, each source row's
local residual is projected onto the residual space of the global model.
The projection is then rescaled so the row keeps its local residual
distance.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassTooSmall,
    CRatioExceeded,
    DegenerateResidual,
    RankDeficient,
    SegmentRankDeficient,
    ShapeMismatch,
)
from .matrix import as_matrix, preprocess_fit, svd_truncated
from .pls import simpls_fit
from .resampling import derive_seeds, make_splits

RESIDUAL_TOL = 1e-14
DEFAULT_CRATIO_MAX = 2.0


@dataclass(frozen=True)
class CRatioReport:
    """Ratios c_{k,a}/c_a of local to global y-loadings, one row per segment."""

    ratios: np.ndarray
    limit: float = DEFAULT_CRATIO_MAX

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.ratios)))

    def exceeded(self):
        """(segment, component) pairs with |ratio| above the limit, components from 1."""
        k, a = np.nonzero(np.abs(self.ratios) > self.limit)
        return [(int(i), int(j) + 1) for i, j in zip(k, a)]


@dataclass(frozen=True)
class PvSet:
    X: np.ndarray
    meta: dict
    cratio: CRatioReport | None = None


@dataclass
class AugmentedDataset:
    X: np.ndarray
    y: np.ndarray | None
    classes: np.ndarray | None
    meta: dict
    pvsets: list = field(default_factory=list)

    @property
    def nrows(self):
        return self.X.shape[0]


def _restore_residual(E_local, E_global, segment, rows):
    """Rescale rows of `E_global` to the squared norms of rows of `E_local`."""
    q_local = np.sum(E_local ** 2, axis=1)
    q_global = np.sum(E_global ** 2, axis=1)
    bad = np.flatnonzero((q_global <= RESIDUAL_TOL) & (q_local > RESIDUAL_TOL))
    if bad.size:
        raise DegenerateResidual(segment, int(rows[bad[0]]))
    ok = q_global > RESIDUAL_TOL
    factor = np.zeros_like(q_local)
    factor[ok] = np.sqrt(q_local[ok] / q_global[ok])
    return E_global * factor[:, None]


def _align(reference, local):
    """Signs (+1/-1) that make columns of `local` point along `reference`."""
    signs = np.sign(np.sum(reference * local, axis=0))
    signs[signs == 0] = 1.0
    return signs


def _local_svd(Z, ncomp, segment):
    nrows, ncols = Z.shape
    if ncomp > min(nrows, ncols):
        raise SegmentRankDeficient(segment, ncomp)
    basis = svd_truncated(Z, ncomp)
    sigma = basis.sigma
    if sigma[-1] <= max(nrows, ncols) * np.finfo(float).eps * sigma[0]:
        raise SegmentRankDeficient(segment, ncomp)
    return basis


def _check_plan(plan, nrows):
    if plan.nrows != nrows:
        raise ShapeMismatch(f"plan covers {plan.nrows} rows, data has {nrows}")


def generate_pv_svd(X, ncomp, plan, standardize=False, scale_scores=True):
    """One PV-set from an SVD model with `ncomp` components.

    With `scale_scores` on, local scores are multiplied by sigma_a/sigma_{k,a}
    so the h distances carry over; with it off the explained part is the
    pure rotation X_k V_k V'.
    """
    X = as_matrix(X)
    _check_plan(plan, X.shape[0])
    pre = preprocess_fit(X, standardize)
    Z = pre.apply(X)
    glob = svd_truncated(Z, ncomp)
    V, sigma = glob.V, glob.sigma
    if sigma[-1] <= max(Z.shape) * np.finfo(float).eps * sigma[0]:
        raise RankDeficient(ncomp)

    Zpv = np.empty_like(Z)
    for k in range(plan.K):
        rows = plan.segment(k)
        train = plan.assignment != k
        loc = _local_svd(Z[train], ncomp, k)
        Vk = loc.V * _align(V, loc.V)
        Zk = Z[rows]
        Tk = Zk @ Vk
        Tpv = Tk * (sigma / loc.sigma) if scale_scores else Tk
        Ek = Zk - Tk @ Vk.T
        Epv = _restore_residual(Ek, Ek - (Ek @ V) @ V.T, k, rows)
        Zpv[rows] = Tpv @ V.T + Epv

    meta = {"method": "svd", "K": plan.K, "A": int(ncomp), "seed": plan.seed,
            "scheme": plan.scheme, "standardize": bool(standardize),
            "scale_scores": bool(scale_scores)}
    return PvSet(X=pre.inverse(Zpv), meta=meta)


def _weight_coefs(model):
    """Coefficients on the raw weight scores X @ W[:, :a], for a = 1..A."""
    G = model.P.T @ model.W
    return [np.linalg.solve(G[:a, :a], model.c[:a]) for a in range(1, model.ncomp + 1)]


def _pv_weight_scores(yk, beta):
    """Weight scores U with U[:, :a] @ beta[a-1] == yk[:, a-1] for every a.

    Solved one column at a time. When P'W is exactly the identity this gives
    the local scores times c_k/c; solving instead of scaling keeps every
    component count exact when P'W has drifted.
    """
    U = np.empty_like(yk)
    for a, b in enumerate(beta):
        U[:, a] = (yk[:, a] - U[:, :a] @ b[:a]) / b[a]
    return U


def generate_pv_pls(X, y, ncomp, plan, standardize=False,
                    cratio_max=DEFAULT_CRATIO_MAX):
    """One PV-set from a single-response PLS model with `ncomp` components.

    Returns the PV-set and the report of local/global y-loading ratios.
    Ratios with magnitude above `cratio_max` trigger a `CRatioExceeded`
    warning and are never clipped.
    """
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    _check_plan(plan, X.shape[0])
    pre = preprocess_fit(X, standardize)
    Z = pre.apply(X)
    yc = y - y.mean()
    glob = simpls_fit(Z, yc, ncomp)
    W, P, c = glob.W, glob.P, glob.c
    G = P.T @ W
    R = glob.rotations()
    beta = _weight_coefs(glob)

    ratios = np.empty((plan.K, ncomp))
    Zpv = np.empty_like(Z)
    for k in range(plan.K):
        rows = plan.segment(k)
        train = plan.assignment != k
        if ncomp > min(int(train.sum()) - 1, Z.shape[1]):
            raise SegmentRankDeficient(k, ncomp)
        try:
            loc = simpls_fit(Z[train], yc[train], ncomp)
        except RankDeficient as exc:
            raise SegmentRankDeficient(k, ncomp) from exc
        signs = _align(W, loc.W)
        ratios[k] = loc.c * signs / c
        Zk = Z[rows]
        Uk = Zk @ loc.W
        Tk = Zk @ loc.rotations()
        Ek = Zk - Tk @ loc.P.T
        yk = np.column_stack([Uk[:, :a + 1] @ b for a, b in enumerate(_weight_coefs(loc))])
        Tpv = np.linalg.solve(G.T, _pv_weight_scores(yk, beta).T).T
        # oblique projection: the restored residual has no scores in the global model
        Epv = _restore_residual(Ek, Ek - (Ek @ R) @ P.T, k, rows)
        Zpv[rows] = Tpv @ P.T + Epv

    report = CRatioReport(ratios=ratios, limit=cratio_max)
    bad = report.exceeded()
    if bad:
        warnings.warn(
            f"{len(bad)} c_k/c ratio(s) outside [0, {cratio_max:g}], "
            f"max |ratio| = {report.max_abs:.3g}, first (segment, component) = {bad[0]}",
            CRatioExceeded, stacklevel=2)
    meta = {"method": "pls", "K": plan.K, "A": int(ncomp), "seed": plan.seed,
            "scheme": plan.scheme, "standardize": bool(standardize),
            "cratio_max": float(cratio_max)}
    return PvSet(X=pre.inverse(Zpv), meta=meta, cratio=report), report


def class_plans(labels, K, seed, scheme="random"):
    """One split plan per class, keyed by class label in sorted order."""
    levels = np.unique(labels)
    seeds = derive_seeds(seed, len(levels))
    plans = {}
    for level, s in zip(levels, seeds):
        n = int(np.sum(labels == level))
        if n < K:
            raise ClassTooSmall(level, K)
        plans[level] = make_splits(n, K, s, scheme)
    return plans


def _binary_response(classes):
    levels = np.unique(classes)
    if levels.size != 2:
        raise ValueError(
            f"PLS augmentation of class labels needs exactly 2 classes, got {levels.size}")
    return (classes == levels[1]).astype(np.float64)


def _one_set(X, y, classes, method, ncomp, K, set_seed, scheme, standardize,
             scale_scores, per_class, cratio_max):
    if method == "svd" and per_class:
        Xpv = np.empty_like(X)
        for level, plan in class_plans(classes, K, set_seed, scheme).items():
            rows = np.flatnonzero(classes == level)
            Xpv[rows] = generate_pv_svd(X[rows], ncomp, plan, standardize,
                                        scale_scores).X
        return PvSet(X=Xpv, meta={"seed": set_seed})
    plan = make_splits(X.shape[0], K, set_seed, scheme)
    if method == "svd":
        return generate_pv_svd(X, ncomp, plan, standardize, scale_scores)
    response = _binary_response(classes) if y is None else y
    pvset, _ = generate_pv_pls(X, response, ncomp, plan, standardize, cratio_max)
    return pvset


def augment(X, y=None, classes=None, method="pls", ncomp=2, K=4, n_sets=1, seed=0,
            scheme="random", standardize=False, scale_scores=True, per_class=None,
            cratio_max=DEFAULT_CRATIO_MAX, jobs=1):
    """Stack the training data with `n_sets` PV-sets.

    Each PV-set uses its own split plan seeded from a child of `seed`. The
    child seeds are listed in ``meta["set_seeds"]``. Responses or class
    labels are repeated for every set. With ``method="svd"`` and class
    labels, PV-sets are generated within each class separately (set
    `per_class` to False to use one model for all rows). ``method="pls"``
    with class labels uses the 0/1 indicator of the second sorted class as
    the response.
    """
    X = as_matrix(X)
    if method not in ("svd", "pls"):
        raise ValueError(f"method must be 'svd' or 'pls', got {method!r}")
    if y is not None and classes is not None:
        raise ValueError("give either a response y or class labels, not both")
    if y is not None:
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if classes is not None:
        classes = np.asarray(classes)
        if classes.shape[0] != X.shape[0]:
            raise ShapeMismatch(
                f"X has {X.shape[0]} rows but {classes.shape[0]} class labels")
    if method == "pls" and y is None and classes is None:
        raise ValueError("PLS augmentation needs a response or class labels")
    if per_class is None:
        per_class = method == "svd" and classes is not None
    if per_class and (method != "svd" or classes is None):
        raise ValueError("per-class generation needs method='svd' and class labels")
    n_sets = int(n_sets)
    if n_sets < 0:
        raise ValueError("n_sets must be non-negative")

    set_seeds = derive_seeds(seed, n_sets)
    args = (X, y, classes, method, ncomp, K)
    opts = (scheme, standardize, scale_scores, per_class, cratio_max)
    if jobs > 1 and n_sets > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            pvsets = list(pool.map(lambda s: _one_set(*args, s, *opts), set_seeds))
    else:
        pvsets = [_one_set(*args, s, *opts) for s in set_seeds]

    reps = n_sets + 1
    meta = {"method": method, "A": int(ncomp), "K": int(K), "n_sets": n_sets,
            "seed": int(seed), "set_seeds": set_seeds, "scheme": scheme,
            "standardize": bool(standardize), "per_class": bool(per_class)}
    if method == "svd":
        meta["scale_scores"] = bool(scale_scores)
    else:
        meta["cratio_max"] = float(cratio_max)
        meta["cratio_max_observed"] = max(
            (p.cratio.max_abs for p in pvsets if p.cratio is not None), default=None)
    return AugmentedDataset(
        X=np.vstack([X] + [p.X for p in pvsets]),
        y=None if y is None else np.tile(y, reps),
        classes=None if classes is None else np.tile(classes, reps),
        meta=meta,
        pvsets=pvsets,
    )
