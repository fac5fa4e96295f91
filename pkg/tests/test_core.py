import math

import numpy as np
import pytest

from ldes.core import (
    BrownConradyParams,
    FovAngle,
    ImageBuffer,
    FootageMap,
    ProjectionParams,
    ViewMap,
    centered_coords,
    centered_grid,
)


class TestImageBuffer:
    def test_validates_shape_and_finiteness(self):
        buf = ImageBuffer(np.zeros((4, 6, 3), dtype=np.float32))
        assert (buf.width, buf.height, buf.channels) == (6, 4, 3)
        with pytest.raises(ValueError):
            ImageBuffer(np.full((2, 2, 1), np.nan, dtype=np.float32))
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((2, 2, 5), dtype=np.float32))

    def test_immutable(self):
        buf = ImageBuffer(np.zeros((2, 2, 1), dtype=np.float32))
        with pytest.raises(ValueError):
            buf.data[0, 0, 0] = 1.0


class TestFovAngle:
    def test_noted_degrees_round_up(self):
        assert FovAngle.from_degrees(146).noted_degrees == 146
        assert FovAngle.from_degrees(146.3).noted_degrees == 147
        assert FovAngle.from_radians(math.pi).noted_degrees == 180

    def test_rejects_inconsistent_label(self):
        with pytest.raises(ValueError):
            FovAngle(math.pi, 90)
        with pytest.raises(ValueError):
            FovAngle(0.0, 0)


class TestMapTypes:
    def test_view_map_channel_rules(self):
        image = ImageBuffer(np.full((4, 4, 2), 0.5, dtype=np.float32))
        vmap = ViewMap(image, FovAngle.from_degrees(180))
        assert not vmap.has_vignette
        with pytest.raises(ValueError):
            ViewMap(ImageBuffer(np.zeros((4, 4, 4), dtype=np.float32)),
                    FovAngle.from_degrees(180))

    def test_footage_map_rules(self):
        good = np.zeros((4, 4, 4), dtype=np.float32)
        good[:, :, 3] = 1.0
        FootageMap(ImageBuffer(good), FovAngle.from_degrees(180))
        with pytest.raises(ValueError):  # not square
            FootageMap(ImageBuffer(np.zeros((4, 6, 4), dtype=np.float32)),
                       FovAngle.from_degrees(180))
        bad_alpha = good.copy()
        bad_alpha[0, 0, 3] = 0.5
        with pytest.raises(ValueError):
            FootageMap(ImageBuffer(bad_alpha), FovAngle.from_degrees(180))

    def test_spherical_lens_is_degenerate_case(self):
        params = ProjectionParams(omega=math.pi, k_x=0.3, k_y_top=0.3,
                                  k_y_bottom=0.3, squeeze=1.0)
        assert params.is_symmetric_k
        assert params.bc.is_identity


class TestBrownConradyParams:
    def test_identity_detection(self):
        assert BrownConradyParams().is_identity
        assert not BrownConradyParams(radial_x=(0.1,)).is_identity

    def test_aximorphic_detection_pads_series(self):
        assert not BrownConradyParams(radial_x=(0.1,), radial_y=(0.1, 0.0)).is_aximorphic
        assert BrownConradyParams(radial_x=(0.1,), radial_y=(0.2,)).is_aximorphic


class TestCenteredCoords:
    def test_center_pixel_of_odd_buffer_is_origin(self):
        v = centered_coords(2, 2, 5, 5)
        assert v == pytest.approx([0.0, 0.0], abs=1e-15)

    def test_rightmost_column_tends_to_one(self):
        for w in (10, 100, 10000):
            v = centered_coords(w - 1, 0, w, 2)
            assert v[0] == pytest.approx(1.0 - 1.0 / w, abs=1e-12)

    def test_4x2_pixel_origin(self):
        # hand evaluation of the convention: s=(0+.5)/4, t=(0+.5)/2, aspect=2
        v = centered_coords(0, 0, 4, 2)
        assert v == pytest.approx([-0.75, -0.25], abs=1e-15)

    def test_rejects_outside_pixels(self):
        with pytest.raises(ValueError):
            centered_coords(4, 0, 4, 2)

    def test_odd_symmetry_on_even_buffers(self, rng):
        w, h = 8, 6
        for _ in range(50):
            col = int(rng.integers(0, w))
            row = int(rng.integers(0, h))
            v = centered_coords(col, row, w, h)
            m = centered_coords(w - 1 - col, h - 1 - row, w, h)
            assert np.allclose(m, -v, atol=1e-15)

    def test_grid_matches_scalar(self):
        grid = centered_grid(4, 2)
        for row in range(2):
            for col in range(4):
                assert np.allclose(grid[row, col], centered_coords(col, row, 4, 2))
