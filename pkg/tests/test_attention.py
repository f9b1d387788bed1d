"""Mask-conditioned attention and residual feature modulation."""

from __future__ import annotations

import numpy as np
import pytest

import oracles
from uavmotion.attention import (
    AttentionMap,
    FeatureMap,
    MgaWeights,
    apply_mga_pyramid,
    attention_map,
    init_mga_weights,
    load_mga_weights,
    modulate,
    resize_bilinear,
    save_mga_weights,
)
from uavmotion.errors import (
    ParseError,
    ShapeMismatch,
    StrideMismatch,
    ValidationError,
)
from uavmotion.motion import MotionMask


def mask_of(arr) -> MotionMask:
    return MotionMask(np.asarray(arr, dtype=np.uint8))


def uniform_weights(scale: float, bias1: float = 0.0, cmid: int = 8) -> MgaWeights:
    return MgaWeights(
        conv3_kernel=np.full((cmid, 1, 3, 3), scale),
        conv3_bias=np.zeros(cmid),
        conv1_kernel=np.full((1, cmid, 1, 1), scale),
        conv1_bias=np.array([bias1]),
        cmid=cmid,
    )


class TestResizeBilinear:
    def test_all_ones_any_dims(self):
        m = mask_of(np.ones((17, 23), np.uint8))
        for dims in ((3, 3), (17, 23), (2, 9)):
            out = resize_bilinear(m, dims)
            assert out.shape == (1, *dims)
            np.testing.assert_allclose(out, 1.0, atol=1e-12)

    def test_all_zeros(self):
        out = resize_bilinear(mask_of(np.zeros((16, 16), np.uint8)), (4, 4))
        assert np.all(out == 0.0)

    def test_checkerboard_halves(self):
        checker = np.indices((4, 4)).sum(axis=0) % 2
        out = resize_bilinear(mask_of(checker), (2, 2))
        np.testing.assert_allclose(out, 0.5, atol=1e-12)

    def test_matches_per_pixel_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            h, w = rng.integers(4, 40, size=2)
            dh, dw = rng.integers(1, 20, size=2)
            m = (rng.random((h, w)) < 0.5).astype(np.uint8)
            got = resize_bilinear(mask_of(m), (int(dh), int(dw)))
            want = oracles.resize_bilinear_loops(m.astype(np.float64), (int(dh), int(dw)))
            np.testing.assert_allclose(got[0], want, atol=1e-9)

    def test_bad_dims_rejected(self):
        with pytest.raises(ValidationError):
            resize_bilinear(mask_of(np.ones((4, 4), np.uint8)), (0, 3))


class TestAttentionMap:
    def test_zero_input_zero_bias_is_half(self):
        w = init_mga_weights(seed=1)
        a = attention_map(np.zeros((1, 6, 9)), w)
        np.testing.assert_allclose(a.data, 0.5, atol=1e-12)

    def test_zero_input_negative_bias_is_tiny(self):
        w = uniform_weights(0.3, bias1=-10.0)
        a = attention_map(np.zeros((1, 5, 5)), w)
        assert a.data.max() < 5e-5

    def test_matches_nested_loop_oracle(self):
        rng = np.random.default_rng(0)
        w = MgaWeights(
            conv3_kernel=rng.normal(size=(8, 1, 3, 3)),
            conv3_bias=rng.normal(size=8),
            conv1_kernel=rng.normal(size=(1, 8, 1, 1)),
            conv1_bias=rng.normal(size=1),
        )
        m = rng.random((1, 7, 11))
        got = attention_map(m, w)
        want = oracles.conv_stack_nested(m, w)
        np.testing.assert_allclose(got.data[0], want, atol=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            attention_map(np.zeros((2, 5, 5)), init_mga_weights())

    def test_translation_equivariant_in_interior(self):
        rng = np.random.default_rng(11)
        w = init_mga_weights(seed=3)
        m = rng.random((1, 12, 12))
        shifted = np.zeros_like(m)
        shifted[0, 2:, 3:] = m[0, :-2, :-3]
        a = attention_map(m, w).data[0]
        b = attention_map(shifted, w).data[0]
        np.testing.assert_allclose(b[3:11, 4:11], a[1:9, 1:8], atol=1e-12)

    def test_uniform_plane_monotone_with_nonnegative_weights(self):
        w = uniform_weights(0.05)
        levels = []
        for v in (0.0, 0.25, 0.5, 0.75, 1.0):
            a = attention_map(np.full((1, 9, 9), v), w).data[0]
            interior = a[2:-2, 2:-2]
            assert np.ptp(interior) < 1e-12
            levels.append(interior[0, 0])
        assert all(b > a for a, b in zip(levels, levels[1:]))


class TestModulate:
    def test_zero_attention_preserves_bits(self):
        rng = np.random.default_rng(13)
        f = FeatureMap(rng.normal(size=(4, 6, 8)), stride=8)
        a = AttentionMap(np.zeros((1, 6, 8)))
        out = modulate(f, a)
        assert out.data.tobytes() == f.data.tobytes()
        assert out.stride == f.stride

    def test_unit_attention_doubles(self):
        rng = np.random.default_rng(17)
        f = FeatureMap(rng.normal(size=(3, 5, 7)), stride=16)
        out = modulate(f, AttentionMap(np.ones((1, 5, 7))))
        np.testing.assert_array_equal(out.data, 2.0 * f.data)

    def test_strict_amplifier_bounds(self):
        rng = np.random.default_rng(19)
        f = FeatureMap(rng.normal(size=(5, 10, 10)), stride=8)
        a_vals = np.clip(rng.random((1, 10, 10)), 1e-6, 1.0 - 1e-6)
        out = modulate(f, AttentionMap(a_vals))
        np.testing.assert_allclose(out.data, f.data * (1.0 + a_vals), atol=0)
        nz = f.data != 0
        mag_in = np.abs(f.data[nz])
        mag_out = np.abs(out.data[nz])
        assert np.all(mag_out > mag_in)
        assert np.all(mag_out < 2.0 * mag_in)

    def test_modulation_is_local(self):
        rng = np.random.default_rng(23)
        f_arr = rng.normal(size=(2, 6, 6))
        a = AttentionMap(rng.random((1, 6, 6)) * 0.5)
        base = modulate(FeatureMap(f_arr, stride=8), a).data
        poked = f_arr.copy()
        poked[1, 3, 4] += 5.0
        out = modulate(FeatureMap(poked, stride=8), a).data
        delta = out != base
        assert delta.sum() == 1 and delta[1, 3, 4]

    def test_spatial_mismatch_rejected(self):
        f = FeatureMap(np.zeros((2, 6, 6)), stride=8)
        with pytest.raises(ShapeMismatch):
            modulate(f, AttentionMap(np.full((1, 6, 7), 0.5)))


class TestPyramid:
    @staticmethod
    def levels(h, w, cmid_channels=4, seed=29):
        rng = np.random.default_rng(seed)
        out = []
        for stride in (8, 16, 32):
            dims = (-(-h // stride), -(-w // stride))
            out.append(
                FeatureMap(rng.normal(size=(cmid_channels, *dims)), stride=stride)
            )
        return tuple(out)

    def test_zero_mask_negative_bias_passthrough(self):
        h, w = 64, 96
        p3, p4, p5 = self.levels(h, w)
        wt = uniform_weights(0.3, bias1=-10.0)
        outs = apply_mga_pyramid(p3, p4, p5, mask_of(np.zeros((h, w))), wt, wt, wt)
        for fin, fout in zip((p3, p4, p5), outs):
            np.testing.assert_allclose(fout.data, fin.data, rtol=1e-4)

    def test_ones_mask_saturated_doubles(self):
        h, w = 64, 96
        p3, p4, p5 = self.levels(h, w, seed=31)
        wt = uniform_weights(10.0)
        outs = apply_mga_pyramid(p3, p4, p5, mask_of(np.ones((h, w))), wt, wt, wt)
        for fin, fout in zip((p3, p4, p5), outs):
            np.testing.assert_allclose(fout.data, 2.0 * fin.data, rtol=1e-3)

    def test_deterministic(self):
        h, w = 40, 72
        p3, p4, p5 = self.levels(h, w, seed=37)
        rng = np.random.default_rng(41)
        m = mask_of((rng.random((h, w)) < 0.3).astype(np.uint8))
        wt = init_mga_weights(seed=5)
        first = apply_mga_pyramid(p3, p4, p5, m, wt, wt, wt)
        second = apply_mga_pyramid(p3, p4, p5, m, wt, wt, wt)
        for a, b in zip(first, second):
            assert a.data.tobytes() == b.data.tobytes()

    def test_wrong_level_dims_rejected(self):
        h, w = 64, 96
        p3, p4, p5 = self.levels(h, w)
        bad_p4 = FeatureMap(np.zeros((4, 9, 9)), stride=16)
        wt = init_mga_weights()
        with pytest.raises(StrideMismatch):
            apply_mga_pyramid(p3, bad_p4, p5, mask_of(np.zeros((h, w))), wt, wt, wt)

    def test_swapped_strides_rejected(self):
        h, w = 64, 96
        p3, p4, p5 = self.levels(h, w)
        wt = init_mga_weights()
        with pytest.raises(StrideMismatch):
            apply_mga_pyramid(p4, p3, p5, mask_of(np.zeros((h, w))), wt, wt, wt)


class TestWeights:
    def test_init_shapes(self):
        w = init_mga_weights(cmid=6, seed=2)
        assert w.conv3_kernel.shape == (6, 1, 3, 3)
        assert w.conv3_bias.shape == (6,)
        assert w.conv1_kernel.shape == (1, 6, 1, 1)
        assert w.conv1_bias.shape == (1,)
        assert np.isfinite(w.conv3_kernel).all()

    def test_json_round_trip(self, tmp_path):
        w = init_mga_weights(seed=9)
        path = str(tmp_path / "w.json")
        save_mga_weights(w, path)
        back = load_mga_weights(path)
        np.testing.assert_array_equal(back.conv3_kernel, w.conv3_kernel)
        np.testing.assert_array_equal(back.conv3_bias, w.conv3_bias)
        np.testing.assert_array_equal(back.conv1_kernel, w.conv1_kernel)
        np.testing.assert_array_equal(back.conv1_bias, w.conv1_bias)
        assert back.cmid == w.cmid

    def test_inconsistent_shapes_rejected(self):
        with pytest.raises(ValidationError):
            MgaWeights(
                conv3_kernel=np.zeros((8, 1, 3, 3)),
                conv3_bias=np.zeros(7),
                conv1_kernel=np.zeros((1, 8, 1, 1)),
                conv1_bias=np.zeros(1),
            )

    def test_nonfinite_rejected(self):
        k = np.zeros((8, 1, 3, 3))
        k[0, 0, 0, 0] = np.nan
        with pytest.raises(ValidationError):
            MgaWeights(
                conv3_kernel=k,
                conv3_bias=np.zeros(8),
                conv1_kernel=np.zeros((1, 8, 1, 1)),
                conv1_bias=np.zeros(1),
            )

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_mga_weights(str(path))

    def test_unknown_keys_rejected(self, tmp_path):
        w = init_mga_weights()
        path = str(tmp_path / "w.json")
        save_mga_weights(w, path)
        import json

        blob = json.loads(open(path).read())
        blob["extra"] = 1
        open(path, "w").write(json.dumps(blob))
        with pytest.raises(ValidationError):
            load_mga_weights(path)
