"""pvsm: projective view-synthesis geometry toolkit.

Deterministic geometry engine for conditioning view-synthesis models:
RGB-D unprojection and z-buffer splat rasterization, Plücker ray-map
algebra with its rigid-motion action, out-of-distribution camera-transform
benchmarks with warped ground truth, masked-image corruption for
pretraining, and masked PSNR/SSIM metrics.
"""

__version__ = "0.1.0"

from .camera_geometry import (
    Camera,
    Intrinsics,
    RigidTransform,
    SimilarityTransform,
    apply_gauge,
    apply_world_scale,
    compose,
    inverse,
    pixel_ray,
    project,
)
from .conditioning import (
    PointCloud,
    ProjectionImage,
    merge,
    projective_condition,
    rasterize,
    transform_cloud,
    unproject_view,
)
from .consistency_bench import (
    AnisotropicPixel,
    BenchCase,
    DollyZoom,
    DollyZoomParams,
    FovZoom,
    RandomGauge,
    Roll,
    TransformSpec,
    WorldScale,
    apply_transform,
    dolly_zoom_trajectory,
    homography_warp,
    random_gauge,
    validity_mask,
)
from .mae_corruption import CorruptedImage, CorruptionSpec, corrupt, patch_grid
from .metrics import MetricReport, masked_psnr, seen_unseen_split, ssim
from .plucker import (
    PluckerMap,
    PluckerRay,
    act_se3,
    klein_residual,
    perturbation_field,
    plucker_from_ray,
    plucker_map,
)

__all__ = [
    "__version__",
    "Camera",
    "Intrinsics",
    "RigidTransform",
    "SimilarityTransform",
    "apply_gauge",
    "apply_world_scale",
    "compose",
    "inverse",
    "pixel_ray",
    "project",
    "PointCloud",
    "ProjectionImage",
    "merge",
    "projective_condition",
    "rasterize",
    "transform_cloud",
    "unproject_view",
    "AnisotropicPixel",
    "BenchCase",
    "DollyZoom",
    "DollyZoomParams",
    "FovZoom",
    "RandomGauge",
    "Roll",
    "TransformSpec",
    "WorldScale",
    "apply_transform",
    "dolly_zoom_trajectory",
    "homography_warp",
    "random_gauge",
    "validity_mask",
    "CorruptedImage",
    "CorruptionSpec",
    "corrupt",
    "patch_grid",
    "MetricReport",
    "masked_psnr",
    "seen_unseen_split",
    "ssim",
    "PluckerMap",
    "PluckerRay",
    "act_se3",
    "klein_residual",
    "perturbation_field",
    "plucker_from_ray",
    "plucker_map",
]
