"""Hot numeric kernels with two interchangeable backends.

Every kernel here has a vectorized numpy implementation and a compiled
numba implementation of the same arithmetic in the same operation order,
so the two backends produce identical rasters (bit-for-bit for everything
except orientation angles, where summation order differs).

The active backend is chosen once at import time: numba when importable,
unless the environment variable UAVMOTION_DISABLE_NUMBA is set to a
non-empty value other than "0". `BACKEND` reports the choice and
benchmarks/bench_kernels.py times one against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("UAVMOTION_DISABLE_NUMBA", "0") not in ("", "0")
USE_NUMBA = _HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"

# 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
CIRCLE_DX = np.array(
    [0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1], dtype=np.int64
)
CIRCLE_DY = np.array(
    [-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3], dtype=np.int64
)

FAST_ARC = 9  # contiguous circle pixels required for a corner


def _disc_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    span = np.arange(-radius, radius + 1)
    dx, dy = np.meshgrid(span, span)
    keep = dx * dx + dy * dy <= radius * radius
    return dx[keep].astype(np.int64), dy[keep].astype(np.int64)


# Circular patch for intensity-centroid orientation.
DISC_DX, DISC_DY = _disc_offsets(15)

# Descriptor sampling offsets never exceed the 19 px keypoint margin.
PATCH_CLAMP = 19

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


# ---------------------------------------------------------------------------
# perspective warp with bilinear sampling (zero fill, coverage weights)
# ---------------------------------------------------------------------------

def _warp_bilinear_numpy(src, h, out_h, out_w):
    sh, sw = src.shape
    ys, xs = np.meshgrid(
        np.arange(out_h, dtype=np.float64),
        np.arange(out_w, dtype=np.float64),
        indexing="ij",
    )
    den = h[2, 0] * xs + h[2, 1] * ys + h[2, 2]
    bad = np.abs(den) < 1e-12
    den = np.where(bad, 1.0, den)
    sx = (h[0, 0] * xs + h[0, 1] * ys + h[0, 2]) / den
    sy = (h[1, 0] * xs + h[1, 1] * ys + h[1, 2]) / den
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)
    x1i = x0i + 1
    y1i = y0i + 1

    def tap(yi, xi):
        inside = (xi >= 0) & (xi < sw) & (yi >= 0) & (yi < sh) & ~bad
        vals = src[np.clip(yi, 0, sh - 1), np.clip(xi, 0, sw - 1)].astype(np.float64)
        return np.where(inside, vals, 0.0), inside.astype(np.float64)

    v00, c00 = tap(y0i, x0i)
    v01, c01 = tap(y0i, x1i)
    v10, c10 = tap(y1i, x0i)
    v11, c11 = tap(y1i, x1i)
    w00 = (1.0 - fx) * (1.0 - fy)
    w01 = fx * (1.0 - fy)
    w10 = (1.0 - fx) * fy
    w11 = fx * fy
    out = w00 * v00 + w01 * v01 + w10 * v10 + w11 * v11
    cov = w00 * c00 + w01 * c01 + w10 * c10 + w11 * c11
    return out.astype(np.float32), cov.astype(np.float32)


def _warp_bilinear_loop(src, h, out_h, out_w):
    sh, sw = src.shape
    out = np.empty((out_h, out_w), np.float32)
    cov = np.empty((out_h, out_w), np.float32)
    h00, h01, h02 = h[0, 0], h[0, 1], h[0, 2]
    h10, h11, h12 = h[1, 0], h[1, 1], h[1, 2]
    h20, h21, h22 = h[2, 0], h[2, 1], h[2, 2]
    for y in range(out_h):
        for x in range(out_w):
            den = h20 * x + h21 * y + h22
            if abs(den) < 1e-12:
                out[y, x] = 0.0
                cov[y, x] = 0.0
                continue
            sx = (h00 * x + h01 * y + h02) / den
            sy = (h10 * x + h11 * y + h12) / den
            xf = math.floor(sx)
            yf = math.floor(sy)
            fx = sx - xf
            fy = sy - yf
            x0 = int(xf)
            y0 = int(yf)
            x1 = x0 + 1
            y1 = y0 + 1
            w00 = (1.0 - fx) * (1.0 - fy)
            w01 = fx * (1.0 - fy)
            w10 = (1.0 - fx) * fy
            w11 = fx * fy
            acc = 0.0
            cacc = 0.0
            if 0 <= x0 < sw and 0 <= y0 < sh:
                acc = acc + w00 * src[y0, x0]
                cacc = cacc + w00
            if 0 <= x1 < sw and 0 <= y0 < sh:
                acc = acc + w01 * src[y0, x1]
                cacc = cacc + w01
            if 0 <= x0 < sw and 0 <= y1 < sh:
                acc = acc + w10 * src[y1, x0]
                cacc = cacc + w10
            if 0 <= x1 < sw and 0 <= y1 < sh:
                acc = acc + w11 * src[y1, x1]
                cacc = cacc + w11
            out[y, x] = acc
            cov[y, x] = cacc
    return out, cov


# ---------------------------------------------------------------------------
# separable 5-tap filter, reflected borders (edge-inclusive)
# ---------------------------------------------------------------------------

def _separable5_numpy(src, taps):
    h, w = src.shape
    t0, t1, t2, t3, t4 = taps
    p = np.pad(src.astype(np.float64), ((0, 0), (2, 2)), mode="symmetric")
    tmp = (
        t0 * p[:, 0:w]
        + t1 * p[:, 1 : w + 1]
        + t2 * p[:, 2 : w + 2]
        + t3 * p[:, 3 : w + 3]
        + t4 * p[:, 4 : w + 4]
    )
    p2 = np.pad(tmp, ((2, 2), (0, 0)), mode="symmetric")
    out = (
        t0 * p2[0:h]
        + t1 * p2[1 : h + 1]
        + t2 * p2[2 : h + 2]
        + t3 * p2[3 : h + 3]
        + t4 * p2[4 : h + 4]
    )
    return out.astype(np.float32)


def _separable5_loop(src, taps):
    h, w = src.shape
    tmp = np.empty((h, w), np.float64)
    out = np.empty((h, w), np.float32)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(5):
                xx = x + k - 2
                if xx < 0:
                    xx = -xx - 1
                elif xx >= w:
                    xx = 2 * w - 1 - xx
                acc = acc + taps[k] * src[y, xx]
            tmp[y, x] = acc
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(5):
                yy = y + k - 2
                if yy < 0:
                    yy = -yy - 1
                elif yy >= h:
                    yy = 2 * h - 1 - yy
                acc = acc + taps[k] * tmp[yy, x]
            out[y, x] = acc
    return out


# ---------------------------------------------------------------------------
# binary morphology, square kernel
#
# Out-of-bounds pixels never count against the window: erosion reads the
# border as foreground, dilation as background, so erode(ones) == ones and
# dilate(zeros) == zeros at the image edge.  A square structuring element
# separates into a horizontal then a vertical min/max pass; with these
# border rules the two-pass result matches the full-window definition
# exactly.
# ---------------------------------------------------------------------------

def _erode_numpy(mask, k):
    r = k // 2
    p = np.pad(mask, ((0, 0), (r, r)), mode="constant", constant_values=1)
    rows = np.lib.stride_tricks.sliding_window_view(p, k, axis=1).min(axis=2)
    p = np.pad(rows, ((r, r), (0, 0)), mode="constant", constant_values=1)
    return np.lib.stride_tricks.sliding_window_view(p, k, axis=0).min(axis=2).astype(np.uint8)


def _dilate_numpy(mask, k):
    r = k // 2
    p = np.pad(mask, ((0, 0), (r, r)), mode="constant", constant_values=0)
    rows = np.lib.stride_tricks.sliding_window_view(p, k, axis=1).max(axis=2)
    p = np.pad(rows, ((r, r), (0, 0)), mode="constant", constant_values=0)
    return np.lib.stride_tricks.sliding_window_view(p, k, axis=0).max(axis=2).astype(np.uint8)


def _erode_loop(mask, k):
    h, w = mask.shape
    r = k // 2
    tmp = np.zeros((h, w), np.uint8)
    out = np.zeros((h, w), np.uint8)
    for y in range(h):
        for x in range(w):
            lo = x - r if x - r > 0 else 0
            hi = x + r + 1 if x + r + 1 < w else w
            keep = True
            for xx in range(lo, hi):
                if mask[y, xx] == 0:
                    keep = False
                    break
            if keep:
                tmp[y, x] = 1
    for y in range(h):
        for x in range(w):
            lo = y - r if y - r > 0 else 0
            hi = y + r + 1 if y + r + 1 < h else h
            keep = True
            for yy in range(lo, hi):
                if tmp[yy, x] == 0:
                    keep = False
                    break
            if keep:
                out[y, x] = 1
    return out


def _dilate_loop(mask, k):
    h, w = mask.shape
    r = k // 2
    tmp = np.zeros((h, w), np.uint8)
    out = np.zeros((h, w), np.uint8)
    for y in range(h):
        for x in range(w):
            lo = x - r if x - r > 0 else 0
            hi = x + r + 1 if x + r + 1 < w else w
            for xx in range(lo, hi):
                if mask[y, xx] != 0:
                    tmp[y, x] = 1
                    break
    for y in range(h):
        for x in range(w):
            lo = y - r if y - r > 0 else 0
            hi = y + r + 1 if y + r + 1 < h else h
            for yy in range(lo, hi):
                if tmp[yy, x] != 0:
                    out[y, x] = 1
                    break
    return out


# ---------------------------------------------------------------------------
# FAST-9 segment test with per-corner response
#
# Response: among the maximal contiguous circle arcs that pass the segment
# test (all brighter than center + t, or all darker than center - t), take
# the longest (ties: larger delta sum), and sum |I(p) - I(c)| over it.
# ---------------------------------------------------------------------------

def _fast_scores_loop(img, thr):
    h, w = img.shape
    scores = np.zeros((h, w), np.float32)
    flags = np.zeros(16, np.uint8)
    ring = np.zeros(16, np.float64)
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = float(img[y, x])
            hi = c + thr
            lo = c - thr
            # quick reject: a 9-run must cover >= 2 of the 4 axis anchors
            nb = 0
            nd = 0
            for a in range(0, 16, 4):
                v = img[y + CIRCLE_DY[a], x + CIRCLE_DX[a]]
                if v > hi:
                    nb += 1
                elif v < lo:
                    nd += 1
            if nb < 2 and nd < 2:
                continue
            for i in range(16):
                ring[i] = img[y + CIRCLE_DY[i], x + CIRCLE_DX[i]]
            best = 0.0
            for mode in range(2):
                total = 0
                for i in range(16):
                    ok = ring[i] > hi if mode == 0 else ring[i] < lo
                    if ok:
                        flags[i] = 1
                        total += 1
                    else:
                        flags[i] = 0
                if total < FAST_ARC:
                    continue
                if total == 16:
                    s = 0.0
                    for i in range(16):
                        s = s + abs(ring[i] - c)
                    if s > best:
                        best = s
                    continue
                best_len = 0
                best_sum = 0.0
                for s0 in range(16):
                    if flags[s0] == 1 and flags[(s0 + 15) % 16] == 0:
                        ln = 0
                        sm = 0.0
                        i = s0
                        while flags[i % 16] == 1 and ln < 16:
                            sm = sm + abs(ring[i % 16] - c)
                            ln += 1
                            i += 1
                        if ln > best_len or (ln == best_len and sm > best_sum):
                            best_len = ln
                            best_sum = sm
                if best_len >= FAST_ARC and best_sum > best:
                    best = best_sum
            scores[y, x] = np.float32(best)
    return scores


def _fast_scores_numpy(img, thr):
    h, w = img.shape
    scores = np.zeros((h, w), np.float32)
    if h < 7 or w < 7:
        return scores
    inner = img[3 : h - 3, 3 : w - 3].astype(np.float64)
    ring = np.empty((16, h - 6, w - 6), np.float64)
    for i in range(16):
        dy = int(CIRCLE_DY[i])
        dx = int(CIRCLE_DX[i])
        ring[i] = img[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx]
    bright = ring > inner + thr
    dark = ring < inner - thr
    cand = np.zeros(inner.shape, np.bool_)
    for flags in (bright, dark):
        run = np.zeros(inner.shape, np.bool_)
        for s in range(16):
            ok = flags[s % 16].copy()
            for j in range(1, FAST_ARC):
                ok &= flags[(s + j) % 16]
                if not ok.any():
                    break
            run |= ok
        cand |= run
    cys, cxs = np.nonzero(cand)
    for yy, xx in zip(cys, cxs):
        y = int(yy) + 3
        x = int(xx) + 3
        c = float(img[y, x])
        ringv = [float(img[y + int(CIRCLE_DY[i]), x + int(CIRCLE_DX[i])]) for i in range(16)]
        best = 0.0
        thrf = float(thr)
        for mode in range(2):
            flags = [v > c + thrf for v in ringv] if mode == 0 else [v < c - thrf for v in ringv]
            total = sum(flags)
            if total < FAST_ARC:
                continue
            if total == 16:
                s = 0.0
                for i in range(16):
                    s = s + abs(ringv[i] - c)
                if s > best:
                    best = s
                continue
            best_len = 0
            best_sum = 0.0
            for s0 in range(16):
                if flags[s0] and not flags[(s0 - 1) % 16]:
                    ln = 0
                    sm = 0.0
                    i = s0
                    while flags[i % 16] and ln < 16:
                        sm = sm + abs(ringv[i % 16] - c)
                        ln += 1
                        i += 1
                    if ln > best_len or (ln == best_len and sm > best_sum):
                        best_len = ln
                        best_sum = sm
            if best_len >= FAST_ARC and best_sum > best:
                best = best_sum
        scores[y, x] = best
    return scores


# ---------------------------------------------------------------------------
# intensity-centroid orientation over the radius-15 disc
# ---------------------------------------------------------------------------

def _orientation_loop(img, xs, ys):
    n = xs.shape[0]
    k = DISC_DX.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        x = xs[i]
        y = ys[i]
        m10 = 0.0
        m01 = 0.0
        for j in range(k):
            v = img[y + DISC_DY[j], x + DISC_DX[j]]
            m10 = m10 + DISC_DX[j] * v
            m01 = m01 + DISC_DY[j] * v
        out[i] = math.atan2(m01, m10)
    return out


def _orientation_numpy(img, xs, ys):
    yy = ys[:, None] + DISC_DY[None, :]
    xx = xs[:, None] + DISC_DX[None, :]
    patch = img[yy, xx].astype(np.float64)
    m10 = patch @ DISC_DX.astype(np.float64)
    m01 = patch @ DISC_DY.astype(np.float64)
    return np.arctan2(m01, m10)


# ---------------------------------------------------------------------------
# steered binary descriptor from a frozen pair table
#
# Offsets are rotated by the keypoint angle, rounded half-up, and clamped
# to the 19 px sampling margin; bit i is set when the first sample is
# darker than the second. Bits pack little-endian into 32 bytes.
# ---------------------------------------------------------------------------

def _brief_loop(img, xs, ys, angles, pairs):
    n = xs.shape[0]
    out = np.zeros((n, 32), np.uint8)
    for i in range(n):
        ca = math.cos(angles[i])
        sa = math.sin(angles[i])
        x = xs[i]
        y = ys[i]
        for b in range(256):
            px = float(pairs[b, 0])
            py = float(pairs[b, 1])
            qx = float(pairs[b, 2])
            qy = float(pairs[b, 3])
            rpx = int(math.floor(ca * px - sa * py + 0.5))
            rpy = int(math.floor(sa * px + ca * py + 0.5))
            rqx = int(math.floor(ca * qx - sa * qy + 0.5))
            rqy = int(math.floor(sa * qx + ca * qy + 0.5))
            if rpx > PATCH_CLAMP:
                rpx = PATCH_CLAMP
            elif rpx < -PATCH_CLAMP:
                rpx = -PATCH_CLAMP
            if rpy > PATCH_CLAMP:
                rpy = PATCH_CLAMP
            elif rpy < -PATCH_CLAMP:
                rpy = -PATCH_CLAMP
            if rqx > PATCH_CLAMP:
                rqx = PATCH_CLAMP
            elif rqx < -PATCH_CLAMP:
                rqx = -PATCH_CLAMP
            if rqy > PATCH_CLAMP:
                rqy = PATCH_CLAMP
            elif rqy < -PATCH_CLAMP:
                rqy = -PATCH_CLAMP
            if img[y + rpy, x + rpx] < img[y + rqy, x + rqx]:
                out[i, b >> 3] |= np.uint8(1 << (b & 7))
    return out


def _brief_numpy(img, xs, ys, angles, pairs):
    ca = np.cos(angles)[:, None]
    sa = np.sin(angles)[:, None]
    px = pairs[None, :, 0].astype(np.float64)
    py = pairs[None, :, 1].astype(np.float64)
    qx = pairs[None, :, 2].astype(np.float64)
    qy = pairs[None, :, 3].astype(np.float64)

    def rot(ox, oy):
        rx = np.floor(ca * ox - sa * oy + 0.5).astype(np.int64)
        ry = np.floor(sa * ox + ca * oy + 0.5).astype(np.int64)
        np.clip(rx, -PATCH_CLAMP, PATCH_CLAMP, out=rx)
        np.clip(ry, -PATCH_CLAMP, PATCH_CLAMP, out=ry)
        return rx, ry

    rpx, rpy = rot(px, py)
    rqx, rqy = rot(qx, qy)
    vp = img[ys[:, None] + rpy, xs[:, None] + rpx]
    vq = img[ys[:, None] + rqy, xs[:, None] + rqx]
    bits = (vp < vq).astype(np.uint8)
    return np.packbits(bits, axis=1, bitorder="little")


# ---------------------------------------------------------------------------
# Hamming distance matrix between packed 256-bit descriptors
# ---------------------------------------------------------------------------

def _hamming_numpy(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    out = np.empty((na, nb), np.int32)
    step = 256
    for i0 in range(0, na, step):
        i1 = min(i0 + step, na)
        x = a[i0:i1, None, :] ^ b[None, :, :]
        out[i0:i1] = _POPCOUNT[x].sum(axis=2, dtype=np.int32)
    return out


def _hamming_loop(a, b):
    a64 = a.reshape(-1).view(np.uint64).reshape(a.shape[0], 4)
    b64 = b.reshape(-1).view(np.uint64).reshape(b.shape[0], 4)
    na = a64.shape[0]
    nb = b64.shape[0]
    out = np.empty((na, nb), np.int32)
    m1 = np.uint64(0x5555555555555555)
    m2 = np.uint64(0x3333333333333333)
    m4 = np.uint64(0x0F0F0F0F0F0F0F0F)
    h01 = np.uint64(0x0101010101010101)
    one = np.uint64(1)
    two = np.uint64(2)
    four = np.uint64(4)
    s56 = np.uint64(56)
    for i in range(na):
        for j in range(nb):
            d = 0
            for k in range(4):
                v = a64[i, k] ^ b64[j, k]
                v = v - ((v >> one) & m1)
                v = (v & m2) + ((v >> two) & m2)
                v = (v + (v >> four)) & m4
                d += int((v * h01) >> s56)
            out[i, j] = d
    return out


# ---------------------------------------------------------------------------
# backend dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    _jit = lambda f: njit(cache=True)(f)  # noqa: E731
    warp_bilinear = _jit(_warp_bilinear_loop)
    separable5 = _jit(_separable5_loop)
    erode = _jit(_erode_loop)
    dilate = _jit(_dilate_loop)
    fast_scores = _jit(_fast_scores_loop)
    orientation_angles = _jit(_orientation_loop)
    brief_descriptors = _jit(_brief_loop)
    hamming_matrix = _jit(_hamming_loop)
else:
    warp_bilinear = _warp_bilinear_numpy
    separable5 = _separable5_numpy
    erode = _erode_numpy
    dilate = _dilate_numpy
    fast_scores = _fast_scores_numpy
    orientation_angles = _orientation_numpy
    brief_descriptors = _brief_numpy
    hamming_matrix = _hamming_numpy

NUMPY_IMPLS = {
    "warp_bilinear": _warp_bilinear_numpy,
    "separable5": _separable5_numpy,
    "erode": _erode_numpy,
    "dilate": _dilate_numpy,
    "fast_scores": _fast_scores_numpy,
    "orientation_angles": _orientation_numpy,
    "brief_descriptors": _brief_numpy,
    "hamming_matrix": _hamming_numpy,
}

ACTIVE_IMPLS = {
    "warp_bilinear": warp_bilinear,
    "separable5": separable5,
    "erode": erode,
    "dilate": dilate,
    "fast_scores": fast_scores,
    "orientation_angles": orientation_angles,
    "brief_descriptors": brief_descriptors,
    "hamming_matrix": hamming_matrix,
}
