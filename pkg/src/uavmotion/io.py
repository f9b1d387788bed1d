"""Serialization: images (PGM/PNG), masks, manifests, configs, reports.

Reports are written canonically (sorted keys, two-space indent, floats
rounded to six significant digits, NaN/inf rejected) so that two runs
producing equal values produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict
from typing import Any, Iterator

import numpy as np
from PIL import Image

from .errors import DecodeError, ParseError, ValidationError, WriteError
from .features import FeatureParams
from .frame import Frame
from .geometry import Homography, RansacParams
from .motion import MotionMask, MotionParams
from .pipeline import PipelineConfig
from .synth import (
    BackgroundSpec,
    EgoMotionSpec,
    SpriteSpec,
    SynthConfig,
    SyntheticSequence,
)

MASK_ON = 255


# ---------------------------------------------------------------------------
# PGM (binary, maxval 255)


def _pgm_tokens(blob: bytes, count: int) -> tuple[list[bytes], int]:
    """First `count` whitespace/comment-delimited header tokens and the
    offset one byte past the final delimiter."""
    tokens: list[bytes] = []
    i = 0
    n = len(blob)
    while len(tokens) < count:
        while i < n and blob[i : i + 1].isspace():
            i += 1
        if i < n and blob[i] == ord("#"):
            while i < n and blob[i] not in (10, 13):
                i += 1
            continue
        start = i
        while i < n and not blob[i : i + 1].isspace() and blob[i] != ord("#"):
            i += 1
        if i == start:
            raise DecodeError("truncated PGM header")
        tokens.append(blob[start:i])
        if len(tokens) == count:
            if i >= n or not blob[i : i + 1].isspace():
                raise DecodeError("PGM header not followed by whitespace")
            i += 1
    return tokens, i


def load_pgm(path: str) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    if not blob.startswith(b"P5"):
        raise DecodeError("not a binary PGM (P5) file")
    try:
        (magic, w_tok, h_tok, maxval_tok), offset = _pgm_tokens(blob, 4)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except (ValueError, DecodeError) as exc:
        raise DecodeError(f"malformed PGM header: {exc}") from exc
    if magic != b"P5":
        raise DecodeError("not a binary PGM (P5) file")
    if maxval != 255:
        raise DecodeError(f"unsupported PGM maxval {maxval} (need 255)")
    if width < 1 or height < 1:
        raise DecodeError("non-positive PGM dimensions")
    data = blob[offset : offset + width * height]
    if len(data) != width * height:
        raise DecodeError("PGM raster shorter than header promises")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(path: str, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise WriteError("PGM supports only 2-D uint8 images")
    h, w = image.shape
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(np.ascontiguousarray(image).tobytes())
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# PNG via Pillow


def _load_png(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "RGB"):
                raise DecodeError(f"unsupported PNG mode {img.mode} (need L or RGB)")
            return np.asarray(img, dtype=np.uint8).copy()
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def _save_png(path: str, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise WriteError("PNG writer expects uint8 data")
    if image.ndim == 2:
        mode = "L"
    elif image.ndim == 3 and image.shape[2] == 3:
        mode = "RGB"
    elif image.ndim == 3 and image.shape[2] == 4:
        mode = "RGBA"
    else:
        raise WriteError("PNG writer expects (H, W) or (H, W, 3|4)")
    try:
        Image.fromarray(image, mode=mode).save(path, format="PNG")
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def load_image(path: str) -> np.ndarray:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return load_pgm(path)
    if ext == ".png":
        return _load_png(path)
    raise DecodeError(f"unsupported image extension {ext!r}")


def save_image(path: str, image: np.ndarray) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        save_pgm(path, image)
    elif ext == ".png":
        _save_png(path, image)
    else:
        raise WriteError(f"unsupported image extension {ext!r}")


def load_frame(path: str, index: int = 0) -> Frame:
    return Frame(load_image(path), index=index)


# ---------------------------------------------------------------------------
# Binary masks (stored with 1 -> 255 so they are viewable)


def save_mask(path: str, mask: MotionMask | np.ndarray) -> None:
    data = mask.data if isinstance(mask, MotionMask) else np.asarray(mask)
    save_image(path, (data.astype(np.uint8) * MASK_ON))


def load_mask(path: str) -> MotionMask:
    raw = load_image(path)
    if raw.ndim != 2:
        raise DecodeError("mask images must be single channel")
    bad = ~np.isin(raw, (0, MASK_ON))
    if bad.any():
        raise DecodeError("mask image has values other than 0 and 255")
    return MotionMask((raw == MASK_ON).astype(np.uint8))


# ---------------------------------------------------------------------------
# Sequence manifests


def write_manifest(
    path: str, frame_paths: list[str], gt_path: str | None = None
) -> None:
    base = os.path.dirname(os.path.abspath(path))
    doc = {
        "frames": [os.path.relpath(p, base) for p in frame_paths],
        "gt_homographies": os.path.relpath(gt_path, base) if gt_path else None,
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str) -> tuple[list[str], str | None]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object")
    unknown = set(doc) - {"frames", "gt_homographies"}
    if unknown:
        raise ParseError(f"unknown manifest keys: {sorted(unknown)}")
    frames = doc.get("frames")
    if not isinstance(frames, list) or not all(isinstance(p, str) for p in frames):
        raise ParseError("manifest 'frames' must be a list of paths")
    if not frames:
        raise ParseError("manifest lists no frames")
    base = os.path.dirname(os.path.abspath(path))
    frame_paths = [os.path.join(base, p) for p in frames]
    missing = [p for p in frame_paths if not os.path.isfile(p)]
    if missing:
        raise ParseError(f"manifest lists missing frame file(s): {missing[:3]}")
    gt = doc.get("gt_homographies")
    if gt is not None and not isinstance(gt, str):
        raise ParseError("'gt_homographies' must be a path or null")
    gt_path = os.path.join(base, gt) if gt else None
    return frame_paths, gt_path


def iter_manifest_frames(path: str) -> Iterator[Frame]:
    frame_paths, _ = load_manifest(path)
    for i, fp in enumerate(frame_paths):
        yield load_frame(fp, index=i)


def save_gt_homographies(path: str, homographies: list[Homography]) -> None:
    doc = {"step_homographies": [h.m.reshape(-1).tolist() for h in homographies]}
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_gt_homographies(path: str) -> list[Homography]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read homography file {path}: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"step_homographies"}:
        raise ParseError("expected an object with 'step_homographies'")
    out = []
    for i, row in enumerate(doc["step_homographies"]):
        if not isinstance(row, list) or len(row) != 9:
            raise ParseError(f"entry {i} is not a 9-element row-major matrix")
        out.append(Homography(np.array(row, dtype=np.float64).reshape(3, 3)))
    return out


def export_sequence(
    seq: SyntheticSequence, outdir: str, image_format: str = "png"
) -> str:
    """Write frames/, gt_masks/, gt.json and manifest.json; returns the
    manifest path."""
    if image_format not in ("png", "pgm"):
        raise WriteError(f"unsupported image format {image_format!r}")
    frames_dir = os.path.join(outdir, "frames")
    masks_dir = os.path.join(outdir, "gt_masks")
    os.makedirs(frames_dir, exist_ok=True)
    os.makedirs(masks_dir, exist_ok=True)
    frame_paths = []
    for t, frame in enumerate(seq.frames):
        fp = os.path.join(frames_dir, f"{t:06d}.{image_format}")
        save_image(fp, frame.data)
        frame_paths.append(fp)
        save_mask(os.path.join(masks_dir, f"{t:06d}.png"), seq.gt_masks[t])
    gt_path = os.path.join(outdir, "gt.json")
    save_gt_homographies(gt_path, seq.gt_homographies)
    manifest_path = os.path.join(outdir, "manifest.json")
    write_manifest(manifest_path, frame_paths, gt_path)
    with open(os.path.join(outdir, "config.json"), "w", encoding="ascii") as fh:
        json.dump({"synth": synth_config_to_dict(seq.config)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


# ---------------------------------------------------------------------------
# Config parsing (strict: unknown keys are rejected with their path)


def _check_keys(section: dict, allowed: set[str], path: str) -> None:
    if not isinstance(section, dict):
        raise ValidationError(f"{path or 'config'} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown key(s) at {path or '<root>'}: {sorted(unknown)}")


def _pair(value: Any, path: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"{path} must be a 2-element list")
    return tuple(value)


def _motion_params(section: dict) -> MotionParams:
    _check_keys(
        section,
        {"tau_s", "tau_l", "k_short", "k_long", "open_kernel", "close_kernel", "blur_sigma"},
        "pipeline.motion",
    )
    base = MotionParams()
    return MotionParams(
        tau_s=float(section.get("tau_s", base.tau_s)),
        tau_l=float(section.get("tau_l", base.tau_l)),
        k_short=int(section.get("k_short", base.k_short)),
        k_long=int(section.get("k_long", base.k_long)),
        open_kernel=int(section.get("open_kernel", base.open_kernel)),
        close_kernel=int(section.get("close_kernel", base.close_kernel)),
        blur_sigma=float(section.get("blur_sigma", base.blur_sigma)),
    )


def _feature_params(section: dict) -> FeatureParams:
    _check_keys(
        section,
        {"fast_threshold", "max_keypoints", "ratio_test", "grid_cells"},
        "pipeline.features",
    )
    base = FeatureParams()
    grid = section.get("grid_cells", base.grid_cells)
    return FeatureParams(
        fast_threshold=float(section.get("fast_threshold", base.fast_threshold)),
        max_keypoints=int(section.get("max_keypoints", base.max_keypoints)),
        ratio_test=float(section.get("ratio_test", base.ratio_test)),
        grid_cells=tuple(int(v) for v in _pair(grid, "pipeline.features.grid_cells")),
    )


def _ransac_params(section: dict) -> RansacParams:
    _check_keys(
        section,
        {"max_iterations", "inlier_threshold_px", "min_inliers", "rng_seed"},
        "pipeline.ransac",
    )
    base = RansacParams()
    return RansacParams(
        max_iterations=int(section.get("max_iterations", base.max_iterations)),
        inlier_threshold_px=float(
            section.get("inlier_threshold_px", base.inlier_threshold_px)
        ),
        min_inliers=int(section.get("min_inliers", base.min_inliers)),
        rng_seed=int(section.get("rng_seed", base.rng_seed)),
    )


def _pipeline_config(section: dict) -> PipelineConfig:
    _check_keys(
        section,
        {
            "mode",
            "fallback",
            "target_dims",
            "emit",
            "keep_branch_masks",
            "motion",
            "features",
            "ransac",
        },
        "pipeline",
    )
    base = PipelineConfig()
    emit = section.get("emit", list(base.emit))
    if not isinstance(emit, (list, tuple)) or not all(isinstance(e, str) for e in emit):
        raise ValidationError("pipeline.emit must be a list of strings")
    dims = section.get("target_dims", list(base.target_dims))
    return PipelineConfig(
        mode=section.get("mode", base.mode),
        motion=_motion_params(section.get("motion", {})),
        features=_feature_params(section.get("features", {})),
        ransac=_ransac_params(section.get("ransac", {})),
        target_dims=tuple(int(v) for v in _pair(dims, "pipeline.target_dims")),
        fallback=section.get("fallback", base.fallback),
        emit=tuple(emit),
        keep_branch_masks=bool(section.get("keep_branch_masks", base.keep_branch_masks)),
    )


def _background_spec(section: dict) -> BackgroundSpec:
    _check_keys(section, {"octaves", "base_cell", "lo", "hi"}, "synth.background")
    base = BackgroundSpec()
    return BackgroundSpec(
        octaves=int(section.get("octaves", base.octaves)),
        base_cell=int(section.get("base_cell", base.base_cell)),
        lo=float(section.get("lo", base.lo)),
        hi=float(section.get("hi", base.hi)),
    )


def _ego_spec(section: dict) -> EgoMotionSpec:
    _check_keys(section, {"pan", "zoom", "rotation", "jitter"}, "synth.ego_motion")
    base = EgoMotionSpec()
    pan = section.get("pan", list(base.pan))
    return EgoMotionSpec(
        pan=tuple(float(v) for v in _pair(pan, "synth.ego_motion.pan")),
        zoom=float(section.get("zoom", base.zoom)),
        rotation=float(section.get("rotation", base.rotation)),
        jitter=float(section.get("jitter", base.jitter)),
    )


def _sprite_spec(section: dict, i: int) -> SpriteSpec:
    path = f"synth.sprites[{i}]"
    _check_keys(section, {"size", "velocity", "intensity", "start", "texture"}, path)
    required = {"size", "velocity", "intensity", "start"}
    missing = required - set(section)
    if missing:
        raise ValidationError(f"{path} missing key(s): {sorted(missing)}")
    return SpriteSpec(
        size=tuple(int(v) for v in _pair(section["size"], f"{path}.size")),
        velocity=tuple(float(v) for v in _pair(section["velocity"], f"{path}.velocity")),
        intensity=float(section["intensity"]),
        start=tuple(float(v) for v in _pair(section["start"], f"{path}.start")),
        texture=float(section.get("texture", 0.0)),
    )


def _synth_config(section: dict) -> SynthConfig:
    _check_keys(
        section,
        {"dims", "frames", "seed", "background", "ego_motion", "sprites"},
        "synth",
    )
    base = SynthConfig()
    dims = section.get("dims", list(base.dims))
    sprites_raw = section.get("sprites", [])
    if not isinstance(sprites_raw, list):
        raise ValidationError("synth.sprites must be a list")
    return SynthConfig(
        dims=tuple(int(v) for v in _pair(dims, "synth.dims")),
        frames=int(section.get("frames", base.frames)),
        background=_background_spec(section.get("background", {})),
        ego_motion=_ego_spec(section.get("ego_motion", {})),
        sprites=tuple(_sprite_spec(s, i) for i, s in enumerate(sprites_raw)),
        seed=int(section.get("seed", base.seed)),
    )


_PIPELINE_KEYS = {
    "mode",
    "fallback",
    "target_dims",
    "emit",
    "keep_branch_masks",
    "motion",
    "features",
    "ransac",
}
_SYNTH_KEYS = {"dims", "frames", "seed", "background", "ego_motion", "sprites"}


def parse_config(source: str | dict) -> PipelineConfig | SynthConfig:
    """Parse a config file path or dict.

    Accepts either bare fields ({"mode": ...} / {"frames": ...} — the two
    schemas share no key names) or the explicit {"pipeline": {...}} /
    {"synth": {...}} wrapper. An empty object means pipeline defaults.
    Unknown keys are rejected with their path.
    """
    if isinstance(source, dict):
        doc = source
    else:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {source}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("config root must be a JSON object")
    keys = set(doc)
    if keys <= {"pipeline", "synth"} and keys:
        if len(keys) == 2:
            raise ValidationError("config cannot hold both 'pipeline' and 'synth'")
        if "synth" in doc:
            return _synth_config(doc["synth"])
        return _pipeline_config(doc["pipeline"])
    if keys <= _PIPELINE_KEYS:
        return _pipeline_config(doc)
    if keys <= _SYNTH_KEYS:
        return _synth_config(doc)
    unknown = keys - (_PIPELINE_KEYS | _SYNTH_KEYS | {"pipeline", "synth"})
    if unknown:
        raise ValidationError(f"unknown key(s) at <root>: {sorted(unknown)}")
    raise ValidationError("config mixes pipeline and synth fields")


def pipeline_config_to_dict(cfg: PipelineConfig) -> dict:
    return {
        "mode": cfg.mode,
        "fallback": cfg.fallback,
        "target_dims": list(cfg.target_dims),
        "emit": list(cfg.emit),
        "keep_branch_masks": cfg.keep_branch_masks,
        "motion": asdict(cfg.motion),
        "features": {**asdict(cfg.features), "grid_cells": list(cfg.features.grid_cells)},
        "ransac": asdict(cfg.ransac),
    }


def synth_config_to_dict(cfg: SynthConfig) -> dict:
    return {
        "dims": list(cfg.dims),
        "frames": cfg.frames,
        "seed": cfg.seed,
        "background": asdict(cfg.background),
        "ego_motion": {**asdict(cfg.ego_motion), "pan": list(cfg.ego_motion.pan)},
        "sprites": [
            {
                "size": list(s.size),
                "velocity": list(s.velocity),
                "intensity": s.intensity,
                "start": list(s.start),
                "texture": s.texture,
            }
            for s in cfg.sprites
        ],
    }


# ---------------------------------------------------------------------------
# Canonical reports


def _canonical_value(value: Any, path: str) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise WriteError(f"non-finite value at {path}")
        return float(f"{value:.6g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return _canonical_value(float(value), path)
    if isinstance(value, (list, tuple)):
        return [_canonical_value(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise WriteError(f"non-string key at {path}")
            out[k] = _canonical_value(v, f"{path}.{k}")
        return out
    raise WriteError(f"unserializable {type(value).__name__} at {path}")


def report_to_json(report: dict) -> str:
    """Canonical JSON text: sorted keys, 6 significant digits, no NaN."""
    canon = _canonical_value(report, "$")
    return json.dumps(canon, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path: str, report: dict) -> None:
    text = report_to_json(report)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)
