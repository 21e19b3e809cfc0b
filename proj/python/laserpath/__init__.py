"""Point-cloud registration, top-down mapping and embodiment-aware D* Lite planning."""

from ._core import (
    LaserpathError,
    PointCloud,
    RigidTransform,
    coarse_align,
    compute_fpfh,
    embodiment_radius_cells,
    estimate_normals,
    estimate_rigid_svd,
    filter_heights,
    icp_point_to_plane,
    inflate,
    load_cloud,
    octile_distance,
    plan,
    ransac_plane,
    run_pipeline,
    save_cloud,
    synthetic_scene,
    transform_error,
    voxel_downsample,
)

__all__ = [
    "LaserpathError",
    "PointCloud",
    "RigidTransform",
    "coarse_align",
    "compute_fpfh",
    "embodiment_radius_cells",
    "estimate_normals",
    "estimate_rigid_svd",
    "filter_heights",
    "icp_point_to_plane",
    "inflate",
    "load_cloud",
    "octile_distance",
    "plan",
    "ransac_plane",
    "run_pipeline",
    "save_cloud",
    "synthetic_scene",
    "transform_error",
    "voxel_downsample",
]
