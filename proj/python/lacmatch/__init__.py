"""Panorama label matching with local adaptive clustering."""

from ._core import (
    BoundaryError,
    InfeasibleError,
    InputError,
    __version__,
    box_mean,
    degensac,
    detect_keypoints,
    estimate_homography,
    extract_brief,
    kmeans,
    match_descriptors,
    match_images,
    ransac,
    run_cli,
    synthetic_panorama,
)

__all__ = [
    "BoundaryError",
    "InfeasibleError",
    "InputError",
    "__version__",
    "box_mean",
    "degensac",
    "detect_keypoints",
    "estimate_homography",
    "extract_brief",
    "kmeans",
    "match_descriptors",
    "match_images",
    "ransac",
    "run_cli",
    "synthetic_panorama",
]
