"""Shared fixtures: small synthetic sequences and homography helpers."""

from __future__ import annotations

import numpy as np
import pytest

from uavmotion.geometry import Homography
from uavmotion.synth import (
    BackgroundSpec,
    EgoMotionSpec,
    SpriteSpec,
    SynthConfig,
    generate_sequence,
)


def translation(dx: float, dy: float) -> Homography:
    return Homography(np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]]))


def near_identity(rng: np.random.Generator, scale: float = 1e-3) -> Homography:
    """Random homography close to identity, tame at pixel-scale coordinates.

    Perspective entries are scaled down so w' stays near 1 across a
    typical raster; affine entries carry the requested perturbation.
    """
    m = np.eye(3) + rng.uniform(-scale, scale, size=(3, 3))
    m[2, 0:2] = rng.uniform(-scale, scale, size=2) * 1e-3
    m[2, 2] = 1.0
    return Homography(m)


@pytest.fixture(scope="session")
def seq_pan():
    """20 textured frames under pan+zoom+jitter, no sprites."""
    cfg = SynthConfig(
        dims=(240, 320),
        frames=20,
        ego_motion=EgoMotionSpec(pan=(2.0, 1.0), zoom=1.0005, jitter=0.5),
        seed=29,
    )
    return generate_sequence(cfg)


@pytest.fixture(scope="session")
def seq_sprites():
    """Dark textured fast+slow sprites over a bright panning background."""
    cfg = SynthConfig(
        dims=(240, 320),
        frames=20,
        background=BackgroundSpec(lo=150.0, hi=225.0),
        ego_motion=EgoMotionSpec(pan=(1.0, 0.0)),
        sprites=(
            SpriteSpec(
                size=(32, 32),
                velocity=(6.0, 0.0),
                intensity=60.0,
                start=(20.0, 120.0),
                texture=50.0,
            ),
            SpriteSpec(
                size=(14, 14),
                velocity=(1.0, 0.0),
                intensity=60.0,
                start=(150.0, 40.0),
                texture=50.0,
            ),
        ),
        seed=33,
    )
    return generate_sequence(cfg)


@pytest.fixture(scope="session")
def textured_frame(seq_pan):
    """Single value-noise frame with plenty of corners."""
    return seq_pan.frames[0].data.copy()
