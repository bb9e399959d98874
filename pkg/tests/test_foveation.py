import math

import numpy as np
import pytest

from gazesim.foveation import (IMAGE, PyramidConfig, RotaryConfig, Token,
                               TokenLayout, apply_rotary, assign_token_coords,
                               attention_mask, build_pyramid,
                               token_coord_of_direction)
from gazesim.gimbal import GazeState
from gazesim.panorama import (EquirectPanorama, ViewSpec, dir_from_angles,
                              equirect_pixel, render_view, sample_bilinear)


def noise_panorama(width=128, seed=0):
    rng = np.random.default_rng(seed)
    return EquirectPanorama(rng.uniform(0, 1, (width // 2, width, 3)))


class TestBuildPyramid:
    def test_single_level_equals_render_view(self):
        pano = noise_panorama()
        cfg = PyramidConfig(num_levels=1, resolution=33, fov0=math.radians(40))
        pyr = build_pyramid(pano, GazeState(0.3, -0.1), cfg)
        direct = render_view(pano, ViewSpec(0.3, -0.1, math.radians(40), 33))
        assert np.array_equal(pyr.levels[0], direct)

    def test_four_levels_doubling_fovs(self):
        pano = noise_panorama()
        cfg = PyramidConfig(num_levels=4, resolution=32,
                            fov0=math.radians(13.75))
        pyr = build_pyramid(pano, GazeState(), cfg)
        assert len(pyr.levels) == 4
        assert all(lv.shape == (32, 32, 3) for lv in pyr.levels)
        f0 = math.radians(13.75)
        assert pyr.level_fovs == pytest.approx((f0, 2 * f0, 4 * f0, 8 * f0))

    def test_levels_concentric_at_center_pixel(self):
        pano = noise_panorama(seed=2)
        cfg = PyramidConfig(num_levels=4, resolution=33,
                            fov0=math.radians(13.75))
        gaze = GazeState(0.8, 0.25)
        pyr = build_pyramid(pano, gaze, cfg)
        u, v = equirect_pixel(dir_from_angles(0.8, 0.25), pano.width, pano.height)
        ref = sample_bilinear(pano, u, v)
        for level in pyr.levels:
            assert np.abs(level[16, 16] - ref).max() < 1e-6

    def test_rejects_invalid_coarsest_fov(self):
        with pytest.raises(ValueError):
            PyramidConfig(num_levels=5, resolution=16, fov0=math.radians(13.75))


class TestTokenCoords:
    def test_image_token_count_and_extent(self):
        cfg = PyramidConfig(num_levels=3, resolution=16, patch_grid=4,
                            fov0=math.radians(20))
        layout = assign_token_coords(cfg, timesteps=[0])
        image_tokens = [t for t in layout.tokens if t.kind == IMAGE]
        assert len(image_tokens) == 3 * 16
        extent = cfg.source_extent
        assert layout.image_extent == (extent, extent)
        for tok in image_tokens:
            assert 0.0 <= tok.x <= extent and 0.0 <= tok.y <= extent

    def test_center_patch_identical_across_levels(self):
        # odd patch grid: the middle patch center must coincide at all levels
        cfg = PyramidConfig(num_levels=4, resolution=16, patch_grid=5,
                            fov0=math.radians(13.75))
        layout = assign_token_coords(cfg, timesteps=[0])
        mid_coords = set()
        for lv in range(4):
            toks = [t for t in layout.tokens if t.kind == IMAGE and t.level == lv]
            mid = toks[2 * 5 + 2]
            mid_coords.add((mid.x, mid.y))
        assert len(mid_coords) == 1
        assert mid_coords.pop() == (cfg.source_extent / 2, cfg.source_extent / 2)

    def test_non_image_tokens_at_image_center(self):
        cfg = PyramidConfig(num_levels=2, resolution=16, patch_grid=2,
                            fov0=math.radians(20))
        layout = assign_token_coords(cfg, timesteps=[0, 1], chunk_size=3)
        center = cfg.source_extent / 2
        for tok in layout.tokens:
            if tok.kind != IMAGE:
                assert (tok.x, tok.y) == (center, center)

    def test_query_tokens_span_chunk(self):
        cfg = PyramidConfig(num_levels=1, resolution=16, patch_grid=1,
                            fov0=math.radians(20))
        layout = assign_token_coords(cfg, timesteps=[5], chunk_size=4)
        query_ts = [t.t for t in layout.tokens if t.kind == "query"]
        assert query_ts == [5, 6, 7, 8]

    def test_cross_scale_coordinate_consistency(self):
        # A world direction's coordinate assigned via the patch grid of level
        # l and level l+1 must differ by at most half the coarser source
        # patch; the continuous map is identical across levels by design.
        cfg = PyramidConfig(num_levels=4, resolution=16, patch_grid=16,
                            fov0=math.radians(13.75))
        gaze = GazeState(0.4, 0.1)
        rng = np.random.default_rng(0)
        scale = cfg.resolution / cfg.fov0
        center = cfg.source_extent / 2

        def snapped(coord, level):
            side = cfg.resolution * 2.0 ** level
            pitch = side / cfg.patch_grid
            # index of the patch containing the coordinate, then its center
            rel = coord - (center - side / 2)
            idx = np.clip(np.floor(rel / pitch), 0, cfg.patch_grid - 1)
            return center - side / 2 + (idx + 0.5) * pitch

        for _ in range(300):
            lv = int(rng.integers(0, 3))
            half = cfg.level_fovs[lv] / 2
            ax = rng.uniform(-half * 0.98, half * 0.98)
            ay = rng.uniform(-half * 0.98, half * 0.98)
            x = center + ax * scale
            y = center + ay * scale
            coarser_patch = cfg.resolution * 2.0 ** (lv + 1) / cfg.patch_grid
            for coord in (x, y):
                d = abs(snapped(coord, lv) - snapped(coord, lv + 1))
                assert d <= coarser_patch / 2 + 1e-9

    def test_token_coord_of_direction_level_independent(self):
        cfg = PyramidConfig(num_levels=4, resolution=16, patch_grid=16,
                            fov0=math.radians(13.75))
        gaze = GazeState(-0.5, 0.2)
        d = dir_from_angles(-0.4, 0.3)
        x, y = token_coord_of_direction(d, gaze, cfg)
        # the map has one global scale: recompute with explicit math
        assert 0 <= x <= cfg.source_extent and 0 <= y <= cfg.source_extent
        # gaze direction maps exactly to the image center
        cx, cy = token_coord_of_direction(dir_from_angles(-0.5, 0.2), gaze, cfg)
        assert cx == pytest.approx(cfg.source_extent / 2, abs=1e-9)
        assert cy == pytest.approx(cfg.source_extent / 2, abs=1e-9)


class TestRotary:
    def test_zero_coords_is_identity(self):
        cfg = RotaryConfig(dim=24)
        v = np.random.default_rng(0).normal(size=24)
        assert np.allclose(apply_rotary(v, (0.0, 0.0, 0.0), cfg), v)

    def test_norm_preserved(self):
        cfg = RotaryConfig(dim=48)
        rng = np.random.default_rng(1)
        for _ in range(50):
            v = rng.normal(size=48)
            c = rng.uniform(-40, 40, size=3)
            out = apply_rotary(v, c, cfg)
            assert abs(np.linalg.norm(out) - np.linalg.norm(v)) < 1e-9

    @pytest.mark.parametrize("axis", [0, 1, 2])
    def test_relative_position_property_per_axis(self, axis):
        cfg = RotaryConfig(dim=24)
        rng = np.random.default_rng(axis)
        for _ in range(100):
            q = rng.normal(size=24)
            k = rng.normal(size=24)
            c1 = np.zeros(3)
            c2 = np.zeros(3)
            c1[axis] = float(rng.integers(-20, 20))
            c2[axis] = float(rng.integers(-20, 20))
            lhs = np.dot(apply_rotary(q, c1, cfg), apply_rotary(k, c2, cfg))
            rhs = np.dot(apply_rotary(q, c1 - c2, cfg), k)
            assert abs(lhs - rhs) < 1e-6

    def test_relative_property_joint_coords(self):
        cfg = RotaryConfig(dim=36)
        rng = np.random.default_rng(9)
        for _ in range(100):
            q, k = rng.normal(size=36), rng.normal(size=36)
            c1 = rng.integers(-10, 10, size=3).astype(float)
            c2 = rng.integers(-10, 10, size=3).astype(float)
            lhs = np.dot(apply_rotary(q, c1, cfg), apply_rotary(k, c2, cfg))
            rhs = np.dot(apply_rotary(q, c1 - c2, cfg), k)
            assert abs(lhs - rhs) < 1e-6

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            RotaryConfig(dim=16)  # not divisible by 6
        cfg = RotaryConfig(dim=12)
        with pytest.raises(ValueError):
            apply_rotary(np.zeros(10), (0, 0, 0), cfg)

    def test_batch_application(self):
        cfg = RotaryConfig(dim=12)
        rng = np.random.default_rng(3)
        vecs = rng.normal(size=(5, 12))
        coords = rng.integers(0, 8, size=(5, 3)).astype(float)
        out = apply_rotary(vecs, coords, cfg)
        for i in range(5):
            assert np.allclose(out[i], apply_rotary(vecs[i], coords[i], cfg))


def tiny_layout(timesteps, chunk_size=0):
    cfg = PyramidConfig(num_levels=2, resolution=16, patch_grid=1,
                        fov0=math.radians(20))
    return assign_token_coords(cfg, timesteps=timesteps, chunk_size=chunk_size)


class TestAttentionMask:
    def test_image_image_always_masked(self):
        layout = tiny_layout([0, 1, 2])
        mask = attention_mask(layout, role="eye")
        image = layout.is_image()
        for i in range(len(layout)):
            for j in range(len(layout)):
                if image[i] and image[j]:
                    assert not mask[i, j]

    def test_image_image_prohibition_symmetric(self):
        layout = tiny_layout([0, 1, 2])
        mask = attention_mask(layout, role="eye")
        image = layout.is_image()
        both = np.outer(image, image)
        assert not mask[both].any()
        assert not mask.T[both].any()

    def test_causality(self):
        layout = tiny_layout([0, 1, 2])
        mask = attention_mask(layout, window=100)
        times = layout.times()
        later = times[None, :] > times[:, None]
        assert not mask[later].any()

    def test_hand_window_single_frame(self):
        layout = tiny_layout([0, 1, 2], chunk_size=1)
        mask = attention_mask(layout, role="hand")
        times = layout.times()
        image = layout.is_image()
        for i in range(len(layout)):
            for j in range(len(layout)):
                expected = (times[i] == times[j]) and not (image[i] and image[j])
                assert mask[i, j] == expected

    def test_eye_window_boundary(self):
        layout = tiny_layout(list(range(12)))
        mask = attention_mask(layout, role="eye")
        times = layout.times()
        image = layout.is_image()
        # pick non-image tokens exactly 10 and 9 steps apart
        idx0 = [i for i in range(len(layout)) if not image[i] and times[i] == 0][0]
        idx9 = [i for i in range(len(layout)) if not image[i] and times[i] == 9][0]
        idx10 = [i for i in range(len(layout)) if not image[i] and times[i] == 10][0]
        assert mask[idx9, idx0]        # 9 apart: allowed
        assert not mask[idx10, idx0]   # 10 apart: masked

    def test_deterministic(self):
        layout = tiny_layout([0, 1, 2])
        a = attention_mask(layout, role="eye")
        b = attention_mask(layout, role="eye")
        assert np.array_equal(a, b)

    def test_empty_layout_rejected(self):
        with pytest.raises(ValueError):
            attention_mask(TokenLayout(tokens=(), image_extent=(1, 1)))

    def test_unknown_role_rejected(self):
        layout = tiny_layout([0])
        with pytest.raises(ValueError):
            attention_mask(layout, role="nose")
