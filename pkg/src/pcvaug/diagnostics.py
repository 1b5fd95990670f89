"""Independent checks of generated PV-sets.

Nothing here reuses the generator's fitted state. Global and local models
are refitted from the raw matrices, with explicit projection matrices for
the SVD distances and NIPALS (not SIMPLS) for PLS predictions. For a single
response the two algorithms span the same score space, so their predictions
must agree.
"""

from dataclasses import dataclass, field

import numpy as np

from .engine import CRatioReport, DEFAULT_CRATIO_MAX
from .errors import ShapeMismatch
from .pls import simpls_fit

RULE_TOL = 1e-8


@dataclass
class RuleReport:
    """Deviations between global-model outcomes on PV rows and local-model
    outcomes on the source rows.

    Each entry has the keys rule, component, max_rel_dev, pass and
    cratio_max. Entries whose pass is None are reported for information
    only, the construction does not promise them.
    """

    entries: list = field(default_factory=list)
    tol: float = RULE_TOL
    cratio: CRatioReport | None = None

    @property
    def passed(self):
        return all(e["pass"] for e in self.entries if e["pass"] is not None)

    def max_dev(self, rule, enforced_only=True):
        devs = [e["max_rel_dev"] for e in self.entries if e["rule"] == rule
                and (e["pass"] is not None or not enforced_only)]
        return max(devs) if devs else 0.0

    def to_dict(self):
        return {
            "passed": self.passed,
            "tol": self.tol,
            "cratio_max": None if self.cratio is None else self.cratio.max_abs,
            "rules": self.entries,
        }

    def merge(self, other):
        self.entries.extend(other.entries)
        if other.cratio is not None:
            self.cratio = other.cratio
        return self


def _scale(X, standardize):
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1) if standardize else np.ones(X.shape[1])
    return (X - mean) / sd, (mean, sd)


def _check_shapes(X, Xpv, plan):
    X = np.asarray(X, dtype=np.float64)
    Xpv = np.asarray(Xpv, dtype=np.float64)
    if X.shape != Xpv.shape:
        raise ShapeMismatch(f"X has shape {X.shape}, PV-set has shape {Xpv.shape}")
    if plan is not None and plan.nrows != X.shape[0]:
        raise ShapeMismatch(f"plan covers {plan.nrows} rows, data has {X.shape[0]}")
    return X, Xpv


def _svd_distances(Z, Zfit, ncomp):
    """q and h of rows of Z for a = 1..ncomp, model fitted on Zfit."""
    _, s, Vt = np.linalg.svd(Zfit, full_matrices=False)
    J = Z.shape[1]
    q = np.empty((Z.shape[0], ncomp))
    h = np.empty((Z.shape[0], ncomp))
    for a in range(1, ncomp + 1):
        V = Vt[:a].T
        resid = Z @ (np.eye(J) - V @ V.T)
        q[:, a - 1] = np.sum(resid ** 2, axis=1)
        h[:, a - 1] = np.sum((Z @ V / s[:a]) ** 2, axis=1)
    return q, h


def _rel_dev(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)), initial=0.0))


def check_rules_svd(X, Xpv, plan, ncomp, scale_scores=True, standardize=False,
                    tol=RULE_TOL):
    """Procrustean rules for an SVD PV-set, per component count a = 1..ncomp.

    Enforced: q at every a when `scale_scores` is off; h at every a plus q at
    a = ncomp when it is on.
    """
    X, Xpv = _check_shapes(X, Xpv, plan)
    Z, (mean, sd) = _scale(X, standardize)
    Zpv = (Xpv - mean) / sd

    q_pv = np.empty((X.shape[0], ncomp))
    h_pv = np.empty_like(q_pv)
    q_loc = np.empty_like(q_pv)
    h_loc = np.empty_like(q_pv)
    for k in range(plan.K):
        rows = np.flatnonzero(plan.assignment == k)
        train = plan.assignment != k
        q_pv[rows], h_pv[rows] = _svd_distances(Zpv[rows], Z, ncomp)
        q_loc[rows], h_loc[rows] = _svd_distances(Z[rows], Z[train], ncomp)

    report = RuleReport(tol=tol)
    for a in range(1, ncomp + 1):
        dq = _rel_dev(q_pv[:, a - 1], q_loc[:, a - 1])
        dh = _rel_dev(h_pv[:, a - 1], h_loc[:, a - 1])
        q_enforced = (not scale_scores) or a == ncomp
        report.entries.append({"rule": "q", "component": a, "max_rel_dev": dq,
                               "pass": (dq <= tol) if q_enforced else None,
                               "cratio_max": None})
        report.entries.append({"rule": "h", "component": a, "max_rel_dev": dh,
                               "pass": (dh <= tol) if scale_scores else None,
                               "cratio_max": None})
    return report


def check_rules_svd_per_class(X, Xpv, classes, plans, ncomp, scale_scores=True,
                              standardize=False, tol=RULE_TOL):
    """`check_rules_svd` within each class, plans keyed by class label."""
    X, Xpv = _check_shapes(X, Xpv, None)
    classes = np.asarray(classes)
    report = RuleReport(tol=tol)
    for level, plan in plans.items():
        rows = np.flatnonzero(classes == level)
        sub = check_rules_svd(X[rows], Xpv[rows], plan, ncomp, scale_scores,
                              standardize, tol)
        for e in sub.entries:
            e["class"] = str(level)
        report.merge(sub)
    return report


def nipals_pls1(Z, y, ncomp):
    """Regression coefficients of PLS1 models with 1..ncomp components (J x ncomp)."""
    E = Z.copy()
    f = y.copy()
    J = Z.shape[1]
    W = np.zeros((J, ncomp))
    P = np.zeros((J, ncomp))
    q = np.zeros(ncomp)
    for a in range(ncomp):
        w = E.T @ f
        w /= np.linalg.norm(w)
        t = E @ w
        tt = t @ t
        p = E.T @ t / tt
        q[a] = f @ t / tt
        E = E - np.outer(t, p)
        f = f - q[a] * t
        W[:, a], P[:, a] = w, p
    B = np.empty((J, ncomp))
    for a in range(1, ncomp + 1):
        R = W[:, :a] @ np.linalg.inv(P[:, :a].T @ W[:, :a])
        B[:, a - 1] = R @ q[:a]
    return B


def check_rules_pls(X, y, Xpv, plan, ncomp, standardize=False,
                    cratio_max=DEFAULT_CRATIO_MAX, tol=RULE_TOL):
    """Prediction rule for a PLS PV-set plus the c_k/c ratio report."""
    X, Xpv = _check_shapes(X, Xpv, plan)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    Z, (mean, sd) = _scale(X, standardize)
    Zpv = (Xpv - mean) / sd
    yc = y - y.mean()

    B = nipals_pls1(Z, yc, ncomp)
    glob = simpls_fit(Z, yc, ncomp)
    yhat_pv = np.empty((X.shape[0], ncomp))
    yhat_loc = np.empty_like(yhat_pv)
    ratios = np.empty((plan.K, ncomp))
    for k in range(plan.K):
        rows = np.flatnonzero(plan.assignment == k)
        train = plan.assignment != k
        Bk = nipals_pls1(Z[train], yc[train], ncomp)
        yhat_pv[rows] = Zpv[rows] @ B
        yhat_loc[rows] = Z[rows] @ Bk
        loc = simpls_fit(Z[train], yc[train], ncomp)
        signs = np.sign(np.sum(glob.W * loc.W, axis=0))
        signs[signs == 0] = 1.0
        ratios[k] = loc.c * signs / glob.c

    cratio = CRatioReport(ratios=ratios, limit=cratio_max)
    report = RuleReport(tol=tol, cratio=cratio)
    for a in range(1, ncomp + 1):
        d = _rel_dev(yhat_pv[:, a - 1], yhat_loc[:, a - 1])
        report.entries.append({"rule": "yhat", "component": a, "max_rel_dev": d,
                               "pass": d <= tol, "cratio_max": cratio.max_abs})
    return report


def covariance_summary(X, Xpv):
    """Compare column covariances and per-column mean/sd of X and a PV-set.

    Informational only: the relative Frobenius distance between the two
    covariance matrices and the per-column differences of means and
    standard deviations.
    """
    X, Xpv = _check_shapes(X, Xpv, None)
    C = np.cov(X, rowvar=False).reshape(X.shape[1], X.shape[1])
    Cpv = np.cov(Xpv, rowvar=False).reshape(X.shape[1], X.shape[1])
    denom = np.linalg.norm(C)
    return {
        "cov_rel_distance": float(np.linalg.norm(C - Cpv) / denom) if denom > 0 else float(
            np.linalg.norm(Cpv)),
        "mean_delta": (Xpv.mean(axis=0) - X.mean(axis=0)).tolist(),
        "sd_delta": (Xpv.std(axis=0, ddof=1) - X.std(axis=0, ddof=1)).tolist(),
    }
