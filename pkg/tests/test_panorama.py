import math

import numpy as np
import pytest

from gazesim.panorama import (EquirectPanorama, ViewSpec, angles_from_dir,
                              angles_from_pixel, dir_from_angles, equirect_pixel,
                              load_panorama, pixel_directions, render_view,
                              sample_bilinear, save_image, wrap_angle)


def checker_panorama(width=64, seed=0):
    rng = np.random.default_rng(seed)
    return EquirectPanorama(rng.uniform(0, 1, (width // 2, width, 3)))


class TestAngles:
    def test_neutral_gaze_is_forward(self):
        assert np.allclose(dir_from_angles(0.0, 0.0), [0.0, 0.0, 1.0])

    def test_quarter_turn_right(self):
        assert np.allclose(dir_from_angles(math.pi / 2, 0.0), [1.0, 0.0, 0.0],
                           atol=1e-12)

    def test_scalar_trig_oracle(self):
        # independently evaluated with scalar math
        az, el = 0.3, -0.2
        expected = (math.cos(el) * math.sin(az), math.sin(el),
                    math.cos(el) * math.cos(az))
        assert np.allclose(dir_from_angles(az, el), expected, atol=1e-15)

    def test_inverse_trivials(self):
        assert angles_from_dir(np.array([0.0, 0.0, 1.0])) == (0.0, 0.0)
        az, el = angles_from_dir(np.array([0.0, 1.0, 0.0]))
        assert az == 0.0 and el == pytest.approx(math.pi / 2)

    def test_round_trip_1000_random(self):
        rng = np.random.default_rng(42)
        az = rng.uniform(-math.pi, math.pi, 1000)
        el = rng.uniform(-math.pi / 2 + 1e-6, math.pi / 2 - 1e-6, 1000)
        az2, el2 = angles_from_dir(dir_from_angles(az, el))
        assert np.abs(wrap_angle(az2 - az)).max() < 1e-9
        assert np.abs(el2 - el).max() < 1e-9


class TestEquirectPixel:
    def test_forward_maps_to_center(self):
        assert equirect_pixel(np.array([0.0, 0.0, 1.0]), 1024, 512) == (512.0, 256.0)

    def test_up_maps_to_top_row(self):
        assert equirect_pixel(np.array([0.0, 1.0, 0.0]), 1024, 512) == (512.0, 0.0)

    def test_against_scalar_reimplementation(self):
        rng = np.random.default_rng(3)
        w, h = 512, 256
        for _ in range(20):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            # independent scalar oracle
            theta = math.atan2(v[0], v[2])
            phi = math.asin(max(-1.0, min(1.0, v[1])))
            u_ref = ((theta / (2 * math.pi) + 0.5) * w) % w
            v_ref = min(max((0.5 - phi / math.pi) * h, 0.0), np.nextafter(h, 0))
            u, vv = equirect_pixel(v, w, h)
            assert u == pytest.approx(u_ref, abs=1e-9)
            assert vv == pytest.approx(v_ref, abs=1e-9)

    def test_pixel_round_trip(self):
        rng = np.random.default_rng(4)
        w, h = 256, 128
        az = rng.uniform(-math.pi, math.pi, 200)
        el = rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, 200)
        u, v = equirect_pixel(dir_from_angles(az, el), w, h)
        az2, el2 = angles_from_pixel(u, v, w, h)
        assert np.abs(wrap_angle(az2 - az)).max() < 1e-9
        assert np.abs(el2 - el).max() < 1e-9


class TestBilinear:
    def test_integer_coordinates_hit_texels(self):
        pano = checker_panorama()
        assert np.allclose(sample_bilinear(pano, 3.0, 5.0), pano.pixels[5, 3])

    def test_constant_panorama_any_coordinate(self):
        pano = EquirectPanorama(np.full((8, 16, 3), 0.25))
        rng = np.random.default_rng(0)
        for _ in range(10):
            u, v = rng.uniform(0, 16), rng.uniform(0, 8)
            assert np.allclose(sample_bilinear(pano, u, v), 0.25)

    def test_seam_blends_last_and_first_columns(self):
        px = np.zeros((1, 2, 3))
        px[0, 0] = (1.0, 0.0, 0.0)
        px[0, 1] = (0.0, 1.0, 0.0)
        pano = EquirectPanorama(px)
        # u = width - 0.5 sits halfway between the last and first columns
        assert np.allclose(sample_bilinear(pano, 1.5, 0.0), (0.5, 0.5, 0.0))


class TestRenderView:
    def test_constant_panorama_renders_constant(self):
        pano = EquirectPanorama(np.full((32, 64, 3), 0.6))
        img = render_view(pano, ViewSpec(0.4, -0.3, math.radians(90), 33))
        assert np.allclose(img, 0.6)

    def test_red_blue_hemispheres(self):
        px = np.zeros((64, 128, 3))
        px[:, :64] = (1.0, 0.0, 0.0)   # left half (azimuth < 0): red
        px[:, 64:] = (0.0, 0.0, 1.0)   # right half: blue
        pano = EquirectPanorama(px)
        img = render_view(pano, ViewSpec(0.0, 0.0, math.pi / 2, 64))
        left, right = img[:, :31], img[:, 33:]
        assert left[..., 0].mean() > 0.9 and left[..., 2].mean() < 0.1
        assert right[..., 2].mean() > 0.9 and right[..., 0].mean() < 0.1

    def test_center_pixel_matches_direct_sample(self):
        pano = checker_panorama(width=128, seed=5)
        for az, el in [(0.0, 0.0), (0.7, -0.3), (2.5, 0.9)]:
            img = render_view(pano, ViewSpec(az, el, math.radians(70), 65))
            u, v = equirect_pixel(dir_from_angles(az, el), 128, 64)
            assert np.abs(img[32, 32] - sample_bilinear(pano, u, v)).max() < 1e-6

    def test_fisheye_center_matches_direct_sample(self):
        pano = checker_panorama(width=128, seed=6)
        img = render_view(pano, ViewSpec(0.5, 0.2, math.radians(200), 65,
                                         projection="fisheye"))
        u, v = equirect_pixel(dir_from_angles(0.5, 0.2), 128, 64)
        assert np.abs(img[32, 32] - sample_bilinear(pano, u, v)).max() < 1e-6

    def test_gaze_equivariance_under_roll(self):
        pano = checker_panorama(width=64, seed=7)
        k = 9
        theta = k * 2 * math.pi / 64
        rolled = EquirectPanorama(np.roll(pano.pixels, -k, axis=1))
        a = render_view(pano, ViewSpec(theta, 0.1, math.radians(60), 32))
        b = render_view(rolled, ViewSpec(0.0, 0.1, math.radians(60), 32))
        assert np.abs(a - b).max() < 1e-6

    def test_storage_order_independence(self):
        pano_c = checker_panorama(width=64, seed=8)
        pano_f = EquirectPanorama(np.asfortranarray(pano_c.pixels))
        view = ViewSpec(1.0, 0.2, math.radians(80), 24)
        assert np.array_equal(render_view(pano_c, view), render_view(pano_f, view))

    def test_output_stays_in_unit_range(self):
        pano = checker_panorama(width=128, seed=9)
        img = render_view(pano, ViewSpec(0.3, 0.1, math.radians(120), 50))
        assert img.min() >= 0.0 and img.max() <= 1.0

    @pytest.mark.parametrize("fov,proj", [(0.0, "pinhole"), (math.pi, "pinhole"),
                                          (7.0, "fisheye"), (-1.0, "fisheye")])
    def test_rejects_invalid_fov(self, fov, proj):
        with pytest.raises(ValueError):
            ViewSpec(0.0, 0.0, fov, 16, projection=proj)


class TestPanoramaType:
    def test_rejects_non_two_to_one(self):
        with pytest.raises(ValueError):
            EquirectPanorama(np.zeros((10, 30, 3)))

    def test_rejects_out_of_range_channels(self):
        with pytest.raises(ValueError):
            EquirectPanorama(np.full((4, 8, 3), 1.5))

    def test_png_round_trip(self, tmp_path):
        pano = checker_panorama(width=32, seed=1)
        path = tmp_path / "p.png"
        save_image(path, pano.pixels)
        loaded = load_panorama(path)
        assert loaded.width == 32 and loaded.height == 16
        # 8-bit quantization: half-step tolerance
        assert np.abs(loaded.pixels - pano.pixels).max() <= 0.5 / 255 + 1e-12

    def test_load_rejects_bad_shape(self, tmp_path):
        path = tmp_path / "bad.png"
        save_image(path, np.zeros((10, 30, 3)))
        with pytest.raises(ValueError):
            load_panorama(path)

    def test_pixel_directions_shape_and_norm(self):
        dirs = pixel_directions(16, 8)
        assert dirs.shape == (8, 16, 3)
        assert np.allclose(np.linalg.norm(dirs, axis=-1), 1.0)
