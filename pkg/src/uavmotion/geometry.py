"""Planar homography estimation and perspective warping.

Convention: a homography H mapping frame t to frame t-k acts on column
vectors, so a pixel x in the current frame lands at project_point(H, x)
in the reference frame. warp_perspective follows the same convention:
the output at x is the reference image sampled at project_point(h, x),
which is what compensated differencing needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    DegenerateConfiguration,
    InsufficientInliers,
    PointAtInfinity,
    SingularComposition,
    ValidationError,
)

_RANSAC_CONFIDENCE = 0.999


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so m[2, 2] == 1 where possible.

    When the bottom-right entry vanishes the matrix is scaled to unit
    Frobenius norm instead, with the sign fixed by the largest entry.
    """

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValidationError("homography must be 3x3")
        if not np.all(np.isfinite(m)):
            raise ValidationError("homography entries must be finite")
        fro = float(np.linalg.norm(m))
        if fro == 0.0:
            raise DegenerateConfiguration("zero homography matrix")
        if abs(m[2, 2]) > 1e-9 * fro:
            m = m / m[2, 2]
        else:
            m = m / fro
            flat = m.ravel()
            if flat[int(np.argmax(np.abs(flat)))] < 0:
                m = -m
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateConfiguration("homography is not invertible")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))

    @staticmethod
    def translation(dx: float, dy: float) -> "Homography":
        m = np.eye(3)
        m[0, 2] = dx
        m[1, 2] = dy
        return Homography(m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))


@dataclass(frozen=True)
class PointMatch:
    """Corresponding pixel pair: p_cur in the current frame, p_ref in the reference."""

    p_cur: tuple[float, float]
    p_ref: tuple[float, float]
    score: float = 0.0


@dataclass(frozen=True)
class RansacParams:
    max_iterations: int = 1000
    inlier_threshold_px: float = 3.0
    min_inliers: int = 12
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.inlier_threshold_px <= 0:
            raise ValidationError("inlier_threshold_px must be positive")
        if self.min_inliers < 4:
            raise ValidationError("min_inliers must be >= 4")


@dataclass(frozen=True)
class ValidRegionMask:
    """Binary raster marking current-frame pixels with full bilinear support."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.dtype != np.uint8 or d.ndim != 2:
            raise ValidationError("valid-region mask must be a 2D uint8 ndarray")


def project_point(h: Homography, p: tuple[float, float]) -> tuple[float, float]:
    """Apply the projective map to one point; raises PointAtInfinity if w ~ 0."""
    x, y = float(p[0]), float(p[1])
    m = h.m
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) < 1e-12:
        raise PointAtInfinity(f"point {p} maps to infinity")
    u = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w
    v = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w
    return (u, v)


def project_points(h: Homography, pts: np.ndarray) -> np.ndarray:
    """Vectorized projection of an (N, 2) array; infinities come back as inf."""
    pts = np.asarray(pts, dtype=np.float64)
    m = h.m
    w = m[2, 0] * pts[:, 0] + m[2, 1] * pts[:, 1] + m[2, 2]
    small = np.abs(w) < 1e-12
    w = np.where(small, 1.0, w)
    u = (m[0, 0] * pts[:, 0] + m[0, 1] * pts[:, 1] + m[0, 2]) / w
    v = (m[1, 0] * pts[:, 0] + m[1, 1] * pts[:, 1] + m[1, 2]) / w
    out = np.stack([u, v], axis=1)
    out[small] = np.inf
    return out


def _hartley_normalize(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Translate centroid to origin and scale mean distance to sqrt(2)."""
    c = pts.mean(axis=0)
    d = float(np.sqrt(((pts - c) ** 2).sum(axis=1)).mean())
    if d < 1e-9:
        raise DegenerateConfiguration("point set is (near) coincident")
    s = math.sqrt(2.0) / d
    t = np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])
    return (pts - c) * s, t


def _any3_collinear(pts: np.ndarray) -> bool:
    n = len(pts)
    span = float(np.ptp(pts, axis=0).max())
    if span < 1e-9:
        return True
    eps = 1e-4 * span * span
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                ab = pts[j] - pts[i]
                ac = pts[k] - pts[i]
                area = 0.5 * abs(ab[0] * ac[1] - ab[1] * ac[0])
                if area < eps:
                    return True
    return False


def _dlt_arrays(src: np.ndarray, dst: np.ndarray) -> Homography:
    n = len(src)
    if n < 4:
        raise DegenerateConfiguration("need at least 4 correspondences")
    src_n, t_src = _hartley_normalize(src)
    dst_n, t_dst = _hartley_normalize(dst)
    a = np.zeros((2 * n, 9), dtype=np.float64)
    x, y = src_n[:, 0], src_n[:, 1]
    u, v = dst_n[:, 0], dst_n[:, 1]
    a[0::2, 0] = x
    a[0::2, 1] = y
    a[0::2, 2] = 1.0
    a[0::2, 6] = -u * x
    a[0::2, 7] = -u * y
    a[0::2, 8] = -u
    a[1::2, 3] = x
    a[1::2, 4] = y
    a[1::2, 5] = 1.0
    a[1::2, 6] = -v * x
    a[1::2, 7] = -v * y
    a[1::2, 8] = -v
    _, s, vt = np.linalg.svd(a)
    if s[0] <= 0 or s[7] / s[0] < 1e-10:
        raise DegenerateConfiguration("DLT system is rank deficient")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ hn @ t_src
    return Homography(h)


def dlt_solve(matches: Sequence[PointMatch]) -> Homography:
    """Direct linear transform over >= 4 matches with Hartley normalization."""
    src = np.array([m.p_cur for m in matches], dtype=np.float64)
    dst = np.array([m.p_ref for m in matches], dtype=np.float64)
    if len(src) <= 12 and (_any3_collinear(src) or _any3_collinear(dst)):
        raise DegenerateConfiguration("3 or more correspondences are collinear")
    return _dlt_arrays(src, dst)


def estimate_homography_ransac(
    matches: Sequence[PointMatch], params: RansacParams
) -> tuple[Homography, np.ndarray]:
    """RANSAC over 4-point samples, refit on the inliers of the best model.

    Deterministic for a fixed rng_seed. Iterations stop early once the
    standard adaptive bound (confidence 0.999) is met, never exceeding
    params.max_iterations. Returns the refit model and the indices of
    matches within inlier_threshold_px of it.
    """
    n = len(matches)
    if n < params.min_inliers:
        raise InsufficientInliers(
            f"got {n} matches, need at least {params.min_inliers}"
        )
    src = np.array([m.p_cur for m in matches], dtype=np.float64)
    dst = np.array([m.p_ref for m in matches], dtype=np.float64)
    rng = np.random.default_rng(params.rng_seed)
    thr = params.inlier_threshold_px
    best_count = 0
    best_mask = None
    iterations_needed = params.max_iterations
    it = 0
    while it < iterations_needed:
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        quad_src = src[idx]
        quad_dst = dst[idx]
        if _any3_collinear(quad_src) or _any3_collinear(quad_dst):
            continue
        try:
            model = _dlt_arrays(quad_src, quad_dst)
        except DegenerateConfiguration:
            continue
        proj = project_points(model, src)
        err = np.sqrt(((proj - dst) ** 2).sum(axis=1))
        mask = err < thr
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
            ratio = count / n
            if ratio >= 1.0:
                break
            denom = math.log(1.0 - ratio**4)
            if denom < 0.0:
                needed = int(math.ceil(math.log(1.0 - _RANSAC_CONFIDENCE) / denom))
                iterations_needed = min(params.max_iterations, max(it, needed))
    if best_mask is None or best_count < params.min_inliers:
        raise InsufficientInliers(
            f"best model has {best_count} inliers, need {params.min_inliers}"
        )
    try:
        refit = _dlt_arrays(src[best_mask], dst[best_mask])
    except DegenerateConfiguration as exc:
        raise InsufficientInliers(f"inlier set degenerate on refit: {exc}") from exc
    proj = project_points(refit, src)
    err = np.sqrt(((proj - dst) ** 2).sum(axis=1))
    final_mask = err < thr
    if int(final_mask.sum()) < params.min_inliers:
        raise InsufficientInliers("refit model lost inlier support")
    return refit, np.flatnonzero(final_mask)


def warp_perspective(
    image: np.ndarray, h: Homography, out_dims: tuple[int, int] | None = None
) -> np.ndarray:
    """Resample `image` onto the current grid: out(x) = image(project(h, x)).

    Bilinear sampling, zero fill outside the source raster, float32 output.
    Identity homography reproduces a float32 input bit for bit.
    """
    img = np.ascontiguousarray(image, dtype=np.float32)
    if img.ndim != 2:
        raise ValidationError("warp_perspective expects a single-channel raster")
    oh, ow = out_dims if out_dims is not None else img.shape
    warped, _ = kernels.warp_bilinear(img, h.m, oh, ow)
    return warped


def warp_with_coverage(
    image: np.ndarray, h: Homography, out_dims: tuple[int, int] | None = None
) -> tuple[np.ndarray, ValidRegionMask]:
    """One-pass warp plus its valid-region mask (shared by compensated_diff)."""
    img = np.ascontiguousarray(image, dtype=np.float32)
    if img.ndim != 2:
        raise ValidationError("warp_with_coverage expects a single-channel raster")
    oh, ow = out_dims if out_dims is not None else img.shape
    warped, cov = kernels.warp_bilinear(img, h.m, oh, ow)
    return warped, ValidRegionMask((cov > 0.999).astype(np.uint8))


def valid_region_mask(h: Homography, dims: tuple[int, int]) -> ValidRegionMask:
    """Pixels whose back-projection has full bilinear support in the reference.

    Computed by warping an all-ones raster and thresholding at 0.999, so it
    agrees exactly with the fill pattern warp_perspective produces.
    """
    ones = np.ones(dims, dtype=np.float32)
    _, cov = kernels.warp_bilinear(ones, h.m, dims[0], dims[1])
    return ValidRegionMask((cov > 0.999).astype(np.uint8))


def cascade_homographies(window: Sequence[Homography]) -> Homography:
    """Compose consecutive step homographies into H_{t,t-k}.

    `window` is ordered newest step first: [H_{t,t-1}, H_{t-1,t-2}, ...,
    H_{t-k+1,t-k}]. Matrices act on column vectors, so each older step
    left-multiplies the accumulated product.
    """
    if len(window) == 0:
        raise ValidationError("cascade window must contain at least one step")
    acc = np.eye(3)
    for step in window:
        acc = step.m @ acc
        if abs(np.linalg.det(acc)) < 1e-12:
            raise SingularComposition("cascade product became singular")
    return Homography(acc)
