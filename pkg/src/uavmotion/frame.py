"""Frame container and grayscale conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Frame:
    """A single decoded video frame: 8-bit raster plus its stream index."""

    data: np.ndarray
    index: int = 0

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.dtype != np.uint8:
            raise ValidationError("frame data must be a uint8 ndarray")
        if d.ndim not in (2, 3) or (d.ndim == 3 and d.shape[2] != 3):
            raise ValidationError("frame must be (H, W) or (H, W, 3)")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValidationError("frame has zero area")
        if self.index < 0:
            raise ValidationError("frame index must be non-negative")

    @property
    def dims(self) -> tuple[int, int]:
        return (self.data.shape[0], self.data.shape[1])

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3


def to_gray(frame: Frame | np.ndarray) -> np.ndarray:
    """ITU-R 601 luma as float32; single-channel input passes through."""
    data = frame.data if isinstance(frame, Frame) else frame
    if data.ndim == 2:
        return data.astype(np.float32)
    r = data[:, :, 0].astype(np.float32)
    g = data[:, :, 1].astype(np.float32)
    b = data[:, :, 2].astype(np.float32)
    return 0.299 * r + 0.587 * g + 0.114 * b
