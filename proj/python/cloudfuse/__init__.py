"""Registration and fusion of UAV and mobile-mapping point clouds."""

from ._cloudfuse import (
    CloudfuseError,
    IcpResult,
    PointCloud,
    RegistrationResult,
    Transform,
    apply_transform,
    coverage_report,
    estimate_transform,
    fuse,
    read_cloud,
    read_pairs,
    read_transform,
    refine_icp,
    synthesize,
    write_cloud,
    write_transform,
)

__all__ = [
    "CloudfuseError",
    "IcpResult",
    "PointCloud",
    "RegistrationResult",
    "Transform",
    "apply_transform",
    "coverage_report",
    "estimate_transform",
    "fuse",
    "read_cloud",
    "read_pairs",
    "read_transform",
    "refine_icp",
    "synthesize",
    "write_cloud",
    "write_transform",
]
