import math

import numpy as np
import pytest
from scipy import ndimage

from conftest import spanning_params
from ldes.core import FovAngle, ImageBuffer, ProjectionParams, ViewMap, centered_grid, texcoord_grid
from ldes.mapgen import (
    default_footage_size,
    derive_footage_map,
    generate_footage_map,
    generate_view_map,
)
from ldes.projection import _forward_arrays


def brute_force_coverage(params, size):
    """Independent coverage oracle: rasterize the forward model over a dense
    footage-pixel grid and mark every equidistant cell that gets hit."""
    omega = FovAngle.from_radians(params.omega).noted_radians
    height = 512
    width = int(round(height * params.aspect))
    v = centered_grid(width, height, params.aspect).reshape(-1, 2)
    fwd = _forward_arrays(v, params)
    theta = fwd["theta"][fwd["valid"]]
    phi = fwd["phi"][fwd["valid"]]
    px = 0.5 + (theta / omega) * np.cos(phi)
    py = 0.5 + (theta / omega) * np.sin(phi)
    ix = np.floor(px * size).astype(int)
    iy = np.floor(py * size).astype(int)
    keep = (ix >= 0) & (ix < size) & (iy >= 0) & (iy < size)
    hit = np.zeros((size, size), dtype=bool)
    hit[iy[keep], ix[keep]] = True
    return hit


class TestGenerateViewMap:
    def test_equidistant_square_is_identity_ramp(self):
        params = ProjectionParams(omega=math.pi, k_x=0.0)
        vmap = generate_view_map(params, 33, 33)
        ident = texcoord_grid(33, 33)
        assert np.allclose(vmap.coords, ident, atol=1e-6)
        assert np.allclose(vmap.coords[16, 16], [0.5, 0.5], atol=1e-7)

    def test_rectilinear_edge_encodes_half_fov(self):
        params = ProjectionParams(omega=math.radians(90), k_x=1.0,
                                  k_y_top=1.0, k_y_bottom=1.0)
        vmap = generate_view_map(params, 256, 256)
        # rightmost pixel center sits just inside the frame edge
        row = vmap.coords[128]
        radius = np.hypot(row[-1, 0] - 0.5, row[-1, 1] - 0.5)
        theta = math.radians(90) * radius
        v_pixel = math.hypot(2 * (255 + 0.5) / 256 - 1, 2 * (128 + 0.5) / 256 - 1)
        assert theta == pytest.approx(math.atan(v_pixel * math.tan(math.radians(45))),
                                      abs=1e-6)
        # the exact frame edge encodes theta = 45 deg, i.e. |RG - 1/2| = 1/2
        assert radius == pytest.approx(0.5, abs=3e-3)

    def test_orthographic_vignette_is_flat_one(self):
        params = ProjectionParams(omega=math.pi, k_x=-1.0, k_y_top=-1.0,
                                  k_y_bottom=-1.0)
        vmap = generate_view_map(params, 64, 64, with_vignette=True)
        inside = np.hypot(*np.moveaxis(vmap.coords - 0.5, 2, 0)) <= 0.5
        assert np.all(vmap.vignette[inside] == 1.0)

    def test_noted_fov_rescale_for_fractional_degrees(self):
        # a 146.3 degree lens is labeled 147 and encoded against 147
        params = ProjectionParams(omega=math.radians(146.3), k_x=0.0)
        vmap = generate_view_map(params, 65, 65)
        assert vmap.fov.noted_degrees == 147
        center_right = vmap.coords[32, -1]
        radius = np.hypot(center_right[0] - 0.5, center_right[1] - 0.5)
        v_edge = 2 * (64 + 0.5) / 65 - 1
        want_theta = v_edge * math.radians(146.3) / 2
        assert radius * math.radians(147) == pytest.approx(want_theta, abs=1e-6)

    def test_radially_monotone_for_monotone_models(self):
        from dataclasses import replace

        for name, params in spanning_params().items():
            vmap = generate_view_map(replace(params, aspect=1.0), 129, 129)
            mid = 64
            radius = np.hypot(vmap.coords[mid, :, 0] - 0.5, vmap.coords[mid, :, 1] - 0.5)
            right = radius[mid:]
            assert np.all(np.diff(right) > -1e-7), name

    def test_aspect_mismatch_rejected(self):
        params = ProjectionParams(omega=math.pi, k_x=0.0, aspect=2.0)
        with pytest.raises(ValueError):
            generate_view_map(params, 64, 64)

    def test_off_field_pixels_clamp_to_rim(self):
        # orthographic at 180: corners are beyond the rim; values stay finite
        params = ProjectionParams(omega=math.pi, k_x=-1.0, k_y_top=-1.0,
                                  k_y_bottom=-1.0)
        vmap = generate_view_map(params, 64, 64)
        corner_radius = np.hypot(vmap.coords[0, 0, 0] - 0.5, vmap.coords[0, 0, 1] - 0.5)
        assert corner_radius == pytest.approx(0.5, abs=1e-6)  # clamped to theta=90


class TestGenerateFootageMap:
    def test_center_pixel(self):
        params = ProjectionParams(omega=math.pi, k_x=0.3, k_y_top=0.3, k_y_bottom=0.3)
        fmap = generate_footage_map(params, 65)
        assert fmap.image.data[32, 32, 0] == 0.5
        assert fmap.image.data[32, 32, 1] == 0.5
        assert fmap.coverage[32, 32] == 1.0

    def test_out_of_field_corners_uncovered(self):
        params = ProjectionParams(omega=math.pi, k_x=-1.0, k_y_top=-1.0,
                                  k_y_bottom=-1.0)
        fmap = generate_footage_map(params, 64)
        assert fmap.coverage[0, 0] == 0.0
        assert fmap.coverage[-1, -1] == 0.0

    @pytest.mark.parametrize("aspect", [1.0, 2.0])
    def test_coverage_matches_brute_force_scan(self, aspect):
        params = ProjectionParams(omega=math.radians(160), k_x=0.0, aspect=aspect)
        size = 96
        fmap = generate_footage_map(params, size)
        got = fmap.coverage > 0.5
        want = brute_force_coverage(params, size)
        # brute-force rasterization is ragged at the boundary; demand exact
        # agreement away from it
        boundary = ndimage.binary_dilation(want, iterations=2) & ~ndimage.binary_erosion(
            want, iterations=2)
        disagree = (got != want) & ~boundary
        assert not disagree.any()


class TestDeriveFootageMap:
    def test_matches_generated_within_one_pixel_rms(self):
        params = ProjectionParams(omega=math.radians(150), k_x=0.4,
                                  k_y_top=0.4, k_y_bottom=0.4)
        vmap = generate_view_map(params, 128, 128)
        derived = derive_footage_map(vmap, 128)
        generated = generate_footage_map(params, 128)
        both = (derived.coverage > 0) & (generated.coverage > 0)
        assert both.mean() > 0.4
        diff = derived.coords[both] - generated.coords[both]
        rms_px = math.sqrt(float(np.mean(np.sum(diff**2, axis=-1)))) * 128
        assert rms_px < 1.0

    def test_identity_view_map_gives_identity_grid(self):
        params = ProjectionParams(omega=math.pi, k_x=0.0)
        vmap = generate_view_map(params, 96, 96)
        derived = derive_footage_map(vmap, 96)
        covered = derived.coverage > 0
        ident = texcoord_grid(96, 96)
        err = np.abs(derived.coords[covered] - ident[covered])
        assert np.max(err) < 1.0 / 96

    def test_constant_map_rejected(self):
        image = ImageBuffer(np.full((32, 32, 2), 0.25, dtype=np.float32))
        vmap = ViewMap(image, FovAngle.from_degrees(180))
        with pytest.raises(ValueError):
            derive_footage_map(vmap, 64)


class TestDefaultFootageSize:
    def test_next_power_of_two(self):
        assert default_footage_size(1920, 1080) == 2048
        assert default_footage_size(512, 512) == 512
        assert default_footage_size(513, 100) == 1024
