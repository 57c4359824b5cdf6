"""Detector-utility driven image enhancement.

Images are numpy uint8 arrays shaped (height, width, 3).
"""

from ._core import (
    Box,
    ContributionDictionary,
    CorrectionParams,
    Detection,
    FeatureVector,
    GroundTruth,
    UtilEnhanceError,
    UtilityScore,
    apply_cascade,
    benefits,
    calibrate,
    centernet_dictionary,
    clahe,
    extract_features,
    gamma_transform,
    iou,
    median_filter,
    plcc,
    select_cascade,
    to_luma,
    utility_score,
    white_balance,
    yolox_dictionary,
)

__all__ = [
    "Box",
    "ContributionDictionary",
    "CorrectionParams",
    "Detection",
    "FeatureVector",
    "GroundTruth",
    "UtilEnhanceError",
    "UtilityScore",
    "apply_cascade",
    "benefits",
    "calibrate",
    "centernet_dictionary",
    "clahe",
    "extract_features",
    "gamma_transform",
    "iou",
    "median_filter",
    "plcc",
    "select_cascade",
    "to_luma",
    "utility_score",
    "white_balance",
    "yolox_dictionary",
]
