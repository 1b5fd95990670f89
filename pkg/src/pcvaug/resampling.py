"""Seeded cross-validation splits.

All randomness in the package goes through numpy's PCG64 bit generator
seeded from a `SeedSequence`. Both are specified independently of the
platform, so a given seed gives the same splits everywhere.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadSegmentCount

SCHEMES = ("random", "venetian")


def rng_from_seed(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_seeds(seed, n, *key):
    """`n` child seeds (64-bit ints) derived deterministically from `seed` and `key`."""
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)] if n else []


@dataclass(frozen=True)
class SegmentPlan:
    K: int
    assignment: np.ndarray
    seed: int
    scheme: str = "random"

    @property
    def nrows(self):
        return self.assignment.shape[0]

    def segment(self, k):
        """Row indices of segment `k` in increasing order."""
        return np.flatnonzero(self.assignment == k)

    def segments(self):
        return [self.segment(k) for k in range(self.K)]

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.K)


def make_splits(nrows, K, seed=0, scheme="random"):
    """Assign `nrows` rows to `K` segments.

    The random scheme shuffles the rows and cuts the permutation into
    contiguous blocks, the venetian scheme sends row i to segment i mod K.
    In both cases the first ``nrows % K`` segments get one extra row.
    """
    nrows, K = int(nrows), int(K)
    if K < 2 or K > nrows:
        raise BadSegmentCount(K, nrows)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown split scheme {scheme!r}, use one of {SCHEMES}")

    if scheme == "venetian":
        assignment = np.arange(nrows) % K
    else:
        order = rng_from_seed(seed).permutation(nrows)
        sizes = np.full(K, nrows // K)
        sizes[: nrows % K] += 1
        assignment = np.empty(nrows, dtype=np.int64)
        assignment[order] = np.repeat(np.arange(K), sizes)
    return SegmentPlan(K=K, assignment=assignment.astype(np.int64), seed=int(seed),
                       scheme=scheme)
