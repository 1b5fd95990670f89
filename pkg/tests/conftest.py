import os

import numpy as np
import pytest
from hypothesis import settings

from pcvaug.dataio import read_csv
from pcvaug.mixed import encode

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "data")


def data_path(name):
    return os.path.join(DATA, name)


@pytest.fixture(scope="session")
def tecator():
    schema = data_path("tecator.schema.json")
    tr, s = read_csv(data_path("tecator_train.csv"), schema)
    te, _ = read_csv(data_path("tecator_test.csv"), schema)
    return encode(tr, s), encode(te, s)


@pytest.fixture(scope="session")
def heart():
    table, schema = read_csv(data_path("heart.csv"), data_path("heart.schema.json"))
    return table, schema, encode(table, schema)


def collinear(rng, nrows, ncols, rank, noise=1e-6):
    """Rank-`rank` matrix plus small noise, the usual shape of spectral data."""
    X = rng.normal(size=(nrows, rank)) @ rng.normal(size=(rank, ncols))
    return X + noise * rng.normal(size=(nrows, ncols))


def projector_distances(Z, Zfit, a):
    """q and h of rows of Z against an a-component SVD of Zfit, by brute force."""
    _, s, Vt = np.linalg.svd(Zfit, full_matrices=False)
    V = Vt[:a].T
    q = np.sum((Z - Z @ V @ V.T) ** 2, axis=1)
    h = np.sum((Z @ V / s[:a]) ** 2, axis=1)
    return q, h


def nipals_coef(Z, y, a):
    E, f = Z.copy(), y.copy()
    W, P, q = [], [], []
    for _ in range(a):
        w = E.T @ f
        w /= np.linalg.norm(w)
        t = E @ w
        p = E.T @ t / (t @ t)
        q.append(f @ t / (t @ t))
        E = E - np.outer(t, p)
        f = f - q[-1] * t
        W.append(w)
        P.append(p)
    W, P = np.array(W).T, np.array(P).T
    return W @ np.linalg.solve(P.T @ W, q)


def rel_dev(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record and print the outcome of one acceptance criterion."""

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
