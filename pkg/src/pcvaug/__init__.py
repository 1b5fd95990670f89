"""Augmentation of collinear numeric and mixed tabular data with
Procrustes validation sets (PV-sets)."""

__version__ = "0.1.0"

from .errors import PcvError
from .matrix import Preprocessor, SvdBasis, distances, preprocess_fit, svd_truncated
from .resampling import SegmentPlan, make_splits
from .pls import PlsModel, simpls_fit
from .engine import (
    AugmentedDataset,
    CRatioReport,
    PvSet,
    augment,
    generate_pv_pls,
    generate_pv_svd,
)

__all__ = [
    "PcvError",
    "Preprocessor",
    "SvdBasis",
    "distances",
    "preprocess_fit",
    "svd_truncated",
    "SegmentPlan",
    "make_splits",
    "PlsModel",
    "simpls_fit",
    "AugmentedDataset",
    "CRatioReport",
    "PvSet",
    "augment",
    "generate_pv_pls",
    "generate_pv_svd",
]
