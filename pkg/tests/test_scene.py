from dataclasses import replace

import numpy as np
import pytest

from spexplore.errors import ConfigInvalid, DimensionMismatch, OutOfBounds, ParseError
from spexplore.raster import read_raster, write_raster
from spexplore.scene import (
    GridMap,
    SceneConfig,
    block_mean,
    generate_synthetic_scene,
    load_scene,
    load_scene_dir,
    sample_in_situ,
    save_scene,
)
from spexplore.spectral import nnls_solve, scene_reconstruction_error


class TestGenerate:
    def test_single_endmember_is_exactly_reconstructable(self, mono_scene):
        E = mono_scene.truth["endmembers"]
        assert scene_reconstruction_error(E.T, mono_scene.orbital) == pytest.approx(0.0, abs=1e-5)
        # each orbital pixel is a float32-rounded copy of the endmember
        np.testing.assert_allclose(mono_scene.orbital.pixels(), np.broadcast_to(E[0], (64, 6)), atol=1e-6)

    def test_deterministic(self):
        cfg = SceneConfig(highres_w=32, highres_h=32, seed=5)
        a, b = generate_synthetic_scene(cfg), generate_synthetic_scene(cfg)
        assert a == b
        assert a.orbital.data.tobytes() == b.orbital.data.tobytes()
        assert generate_synthetic_scene(cfg, seed=6) != a

    def test_true_library_explains_every_orbital_pixel(self, full_scene):
        E = full_scene.truth["endmembers"]
        assert full_scene.grid.rows == full_scene.grid.cols == 32
        worst = max(nnls_solve(E.T, px).residual for px in full_scene.orbital.pixels())
        # only float32 storage error: bounded by sqrt(d) * 2^-24 per band value
        assert worst < np.sqrt(full_scene.bands) * 6e-8 * 2

    def test_block_mean_consistency(self, small_scene):
        orbital = small_scene.orbital.data
        means = block_mean(small_scene.oracle.highres, 4)
        assert np.abs(orbital - means).max() < 1e-6

    def test_abundances_on_simplex(self, full_scene):
        A = full_scene.truth["abundances"]
        assert A.min() >= 0
        np.testing.assert_allclose(A.sum(axis=2), 1.0, atol=1e-6)

    def test_spectra_in_unit_range(self, full_scene):
        E = full_scene.truth["endmembers"]
        assert E.min() >= 0.01 and E.max() <= 1.0

    def test_bad_downsample_names_fields(self):
        with pytest.raises(ConfigInvalid, match="downsample=3.*highres_w=32"):
            generate_synthetic_scene(SceneConfig(highres_w=32, highres_h=32, downsample=3))

    def test_image_noise(self):
        cfg = SceneConfig(highres_w=16, highres_h=16, image_noise=0.05, seed=1)
        clean = generate_synthetic_scene(replace(cfg, image_noise=0.0))
        noisy = generate_synthetic_scene(cfg)
        assert not np.allclose(clean.oracle.highres, noisy.oracle.highres)


class TestSampleInSitu:
    def test_noiseless_returns_truth(self, small_scene, rng):
        cell = (3, 5)
        np.testing.assert_array_equal(sample_in_situ(small_scene.oracle, cell, rng), small_scene.oracle.spectrum(cell))

    def test_seeded_reproducible(self, full_scene):
        a = sample_in_situ(full_scene.oracle, (4, 4), np.random.default_rng(9))
        b = sample_in_situ(full_scene.oracle, (4, 4), np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_noise_level(self, full_scene):
        rng = np.random.default_rng(0)
        cell = (10, 10)
        draws = np.array([sample_in_situ(full_scene.oracle, cell, rng) for _ in range(10_000)])
        std = draws.std(axis=0, ddof=1)
        # truth values are well above zero, so clipping never kicks in
        assert full_scene.oracle.spectrum(cell).min() > 0.05
        np.testing.assert_allclose(std, 0.01, rtol=0.05)

    def test_out_of_bounds(self, small_scene, rng):
        with pytest.raises(OutOfBounds):
            sample_in_situ(small_scene.oracle, (8, 0), rng)

    def test_in_situ_is_block_mean_under_cell(self, small_scene):
        hr = small_scene.oracle.highres
        np.testing.assert_allclose(small_scene.oracle.spectrum((2, 3)), hr[8:12, 12:16].mean(axis=(0, 1)))

    def test_point_sampling(self):
        cfg = SceneConfig(highres_w=16, highres_h=16, point_sampling=True, seed=2)
        s = generate_synthetic_scene(cfg)
        np.testing.assert_array_equal(s.oracle.spectrum((1, 2)), s.oracle.highres[6, 10])


class TestGrid:
    def test_stride_mapping(self, small_scene):
        g = GridMap.for_image(small_scene.orbital, stride=3)
        assert (g.rows, g.cols) == (3, 3)
        assert g.pixel_of((2, 1)) == (6, 3)

    def test_strided_scene_remote(self):
        s = generate_synthetic_scene(SceneConfig(highres_w=32, highres_h=32, grid_stride=2, seed=4))
        assert (s.grid.rows, s.grid.cols) == (4, 4)
        np.testing.assert_array_equal(s.remote_spectrum((1, 3)), s.orbital.data[2, 6])
        np.testing.assert_allclose(s.oracle.spectrum((1, 3)), s.oracle.highres[8:12, 24:28].mean(axis=(0, 1)))

    def test_chebyshev(self):
        g = GridMap(5, 5)
        assert g.distance((0, 0), (3, 1)) == 3


class TestFiles:
    @pytest.mark.parametrize("fmt", ["sser", "csv"])
    def test_round_trip(self, small_scene, tmp_path, fmt):
        cfg = SceneConfig(K=3, bands=8, highres_w=32, highres_h=32, downsample=4, noise_sigma=0.0,
                          blur_radius=1, patch=8, seed=11)
        paths = save_scene(small_scene, tmp_path, cfg, fmt=fmt)
        back = load_scene(paths["orbital"], paths["insitu"], cfg)
        assert back == small_scene
        assert load_scene_dir(tmp_path) == small_scene

    def test_binary_layout(self, tmp_path):
        data = np.arange(2 * 3 * 4, dtype=np.float32).reshape(2, 3, 4)
        p = write_raster(tmp_path / "x.sser", data)
        raw = p.read_bytes()
        assert raw[:4] == b"SSER"
        assert np.frombuffer(raw[4:16], "<u4").tolist() == [3, 2, 4]
        assert np.frombuffer(raw[16:], "<f4")[5] == 5.0
        np.testing.assert_array_equal(read_raster(p), data)

    def test_truncated_names_offset(self, tmp_path):
        p = write_raster(tmp_path / "x.sser", np.ones((2, 2, 3)))
        p.write_bytes(p.read_bytes()[:40])
        with pytest.raises(ParseError, match="byte offset 40"):
            read_raster(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "h.sser"
        p.write_bytes(b"SSER\x01\x00")
        with pytest.raises(ParseError, match="byte offset 6"):
            read_raster(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "m.sser"
        p.write_bytes(b"ENVI" + bytes(12))
        with pytest.raises(ParseError, match="magic"):
            read_raster(p)

    def test_csv_short(self, tmp_path):
        p = write_raster(tmp_path / "x.csv", np.ones((2, 2, 3)))
        p.write_text("\n".join(p.read_text().splitlines()[:-1]) + "\n")
        with pytest.raises(ParseError, match="byte offset"):
            read_raster(p)

    def test_band_mismatch(self, tmp_path):
        o = write_raster(tmp_path / "o.sser", np.ones((2, 2, 3)))
        i = write_raster(tmp_path / "i.sser", np.ones((8, 8, 4)))
        with pytest.raises(DimensionMismatch):
            load_scene(o, i, SceneConfig(downsample=4, highres_w=8, highres_h=8))

    def test_size_mismatch(self, tmp_path):
        o = write_raster(tmp_path / "o.sser", np.ones((2, 2, 3)))
        i = write_raster(tmp_path / "i.sser", np.ones((6, 8, 3)))
        with pytest.raises(DimensionMismatch):
            load_scene(o, i, SceneConfig(downsample=4, highres_w=8, highres_h=8))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_scene(tmp_path / "nope.sser", tmp_path / "nope2.sser")
