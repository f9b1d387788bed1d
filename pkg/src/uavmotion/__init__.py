"""Motion-guided detection frontend for moving-camera (UAV) video.

Estimates frame-to-frame homographies from ORB-style features, compensates
camera motion, extracts a fused short/long-interval motion mask, and
modulates detector feature pyramids with a motion-guided attention block.
Includes an exact-ground-truth synthetic sequence generator for end-to-end
validation.

Hot kernels are compiled with numba when available; set
UAVMOTION_DISABLE_NUMBA=1 to force the pure-numpy implementations.
"""

from __future__ import annotations

from .attention import (
    AttentionMap,
    FeatureMap,
    MgaWeights,
    PYRAMID_STRIDES,
    apply_mga_pyramid,
    attention_map,
    init_mga_weights,
    load_mga_weights,
    modulate,
    resize_bilinear,
    save_mga_weights,
)
from .errors import (
    ConfigError,
    DecodeError,
    DegenerateConfiguration,
    DimensionMismatch,
    EmptyInput,
    ImageTooSmall,
    IndexOutOfRange,
    InsufficientInliers,
    IntervalMismatch,
    OutOfBounds,
    ParseError,
    PointAtInfinity,
    ShapeMismatch,
    SingularComposition,
    StrideMismatch,
    UavMotionError,
    ValidationError,
    WriteError,
)
from .features import (
    FeatureParams,
    Keypoint,
    brief_descriptor,
    compute_descriptors,
    compute_orientations,
    detect_and_describe,
    detect_fast,
    match_hamming_ratio,
    orientation_ic,
    smooth_for_descriptors,
)
from .frame import Frame, to_gray
from .geometry import (
    Homography,
    PointMatch,
    RansacParams,
    ValidRegionMask,
    cascade_homographies,
    dlt_solve,
    estimate_homography_ransac,
    project_point,
    project_points,
    valid_region_mask,
    warp_perspective,
    warp_with_coverage,
)
from .motion import (
    DiffMap,
    MotionExtraction,
    MotionMask,
    MotionParams,
    compensated_diff,
    extract_motion_mask,
    extract_motion_mask_detailed,
    fuse_masks,
    gaussian_blur,
    long_term_mask,
    morphology,
    short_term_mask,
    threshold_binary,
)
from .pipeline import (
    FrameRecord,
    FrameRing,
    LetterboxPlacement,
    PipelineConfig,
    StageTimings,
    letterbox_channel_aware,
    make_synthetic_feature_maps,
    profile_report,
    run_report,
    run_stream,
)
from .synth import (
    BackgroundSpec,
    EgoMotionSpec,
    SpriteSpec,
    SynthConfig,
    SyntheticSequence,
    generate_sequence,
    gt_homography,
    gt_mask,
    gt_step_homography,
    sprite_gt_mask,
    sprite_rect,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # frame
    "Frame",
    "to_gray",
    # geometry
    "Homography",
    "PointMatch",
    "RansacParams",
    "ValidRegionMask",
    "project_point",
    "project_points",
    "dlt_solve",
    "estimate_homography_ransac",
    "warp_perspective",
    "warp_with_coverage",
    "valid_region_mask",
    "cascade_homographies",
    # features
    "FeatureParams",
    "Keypoint",
    "detect_fast",
    "orientation_ic",
    "compute_orientations",
    "smooth_for_descriptors",
    "brief_descriptor",
    "compute_descriptors",
    "detect_and_describe",
    "match_hamming_ratio",
    # motion
    "MotionParams",
    "DiffMap",
    "MotionMask",
    "MotionExtraction",
    "compensated_diff",
    "gaussian_blur",
    "threshold_binary",
    "morphology",
    "short_term_mask",
    "long_term_mask",
    "fuse_masks",
    "extract_motion_mask",
    "extract_motion_mask_detailed",
    # attention
    "PYRAMID_STRIDES",
    "FeatureMap",
    "AttentionMap",
    "MgaWeights",
    "init_mga_weights",
    "save_mga_weights",
    "load_mga_weights",
    "resize_bilinear",
    "attention_map",
    "modulate",
    "apply_mga_pyramid",
    # synth
    "BackgroundSpec",
    "EgoMotionSpec",
    "SpriteSpec",
    "SynthConfig",
    "SyntheticSequence",
    "generate_sequence",
    "gt_homography",
    "gt_step_homography",
    "gt_mask",
    "sprite_gt_mask",
    "sprite_rect",
    # pipeline
    "PipelineConfig",
    "StageTimings",
    "FrameRecord",
    "FrameRing",
    "LetterboxPlacement",
    "run_stream",
    "run_report",
    "profile_report",
    "letterbox_channel_aware",
    "make_synthetic_feature_maps",
    # errors
    "UavMotionError",
    "ValidationError",
    "ConfigError",
    "ParseError",
    "DecodeError",
    "WriteError",
    "DegenerateConfiguration",
    "InsufficientInliers",
    "PointAtInfinity",
    "SingularComposition",
    "ImageTooSmall",
    "OutOfBounds",
    "DimensionMismatch",
    "IntervalMismatch",
    "ShapeMismatch",
    "StrideMismatch",
    "IndexOutOfRange",
    "EmptyInput",
]
