import math
import struct

import numpy as np
import pytest
import tifffile

from ldes.core import (
    FileFormatError,
    FilenameError,
    FovAngle,
    FootageMap,
    ImageBuffer,
    ProjectionParams,
    ViewMap,
)
from ldes.io import (
    LdesFilename,
    format_filename,
    map_filename,
    parse_filename,
    read_image,
    read_map,
    write_image,
    write_map,
)
from ldes.mapgen import generate_footage_map, generate_view_map
from ldes.transform import normalize_fov
from ldes import _exr


class TestFilenameCodec:
    def test_view_map_example(self):
        parts = parse_filename("ViewMap_Cinerama1950_FOV146.tif")
        assert parts == LdesFilename("ViewMap", "Cinerama1950", 146, False, "tif")

    def test_footage_map_with_underscored_description(self):
        parts = parse_filename("FootageMap_TTArtisan7.5mm_Fisheye_FOV180.tif")
        assert parts.map_type == "FootageMap"
        assert parts.description == "TTArtisan7.5mm_Fisheye"
        assert parts.fov_degrees == 180
        assert not parts.normalized

    def test_normalized_view_map(self):
        parts = parse_filename("ViewMap_Cooke14mm_WideAngle_nFOV92.tif")
        assert parts.description == "Cooke14mm_WideAngle"
        assert parts.fov_degrees == 92
        assert parts.normalized

    def test_format_parse_round_trip(self):
        for parts in (
            LdesFilename("ViewMap", "Cinerama1950", 146, False, "tif"),
            LdesFilename("ViewMap", "A_B_C", 92, True, "exr"),
            LdesFilename("FootageMap", "Lens.v2", 180, False, "exr"),
        ):
            assert parse_filename(format_filename(parts)) == parts

    def test_nonconforming_names_name_the_component(self):
        with pytest.raises(FilenameError, match="FOV"):
            parse_filename("ViewMap_NoToken.tif")
        with pytest.raises(FilenameError, match="extension"):
            parse_filename("ViewMap_Lens_FOV90.png")
        with pytest.raises(FilenameError):
            parse_filename("Stmap_Lens_FOV90.tif")
        with pytest.raises(FilenameError, match="leading zeros"):
            parse_filename("ViewMap_Lens_FOV090.tif")

    def test_footage_map_nfov_rejected(self):
        with pytest.raises(FilenameError):
            parse_filename("FootageMap_Lens_nFOV90.tif")

    def test_description_boundary_underscores_rejected(self):
        with pytest.raises(FilenameError, match="description"):
            LdesFilename("ViewMap", "_Lens", 90, False, "tif")

    def test_paths_are_reduced_to_basename(self):
        parts = parse_filename("/x/y/ViewMap_Lens_FOV90.exr")
        assert parts.description == "Lens"


def random_buffer(rng, w, h, c, extremes=True):
    data = rng.uniform(-2.0, 2.0, (h, w, c)).astype(np.float32)
    if extremes:
        flat = data.reshape(-1)
        flat[0] = np.float32(3.4e38)
        flat[1] = np.float32(-3.4e38)
        flat[2] = np.float32(1e-38)   # subnormal territory
        flat[3] = np.float32(-0.0)
    return data


class TestRoundTrips:
    @pytest.mark.parametrize("ext", ["exr", "tif"])
    @pytest.mark.parametrize("channels", [2, 3])
    def test_view_map_bit_exact(self, tmp_path, rng, ext, channels, ):
        data = random_buffer(rng, 17, 9, channels)
        vmap = ViewMap(ImageBuffer(data), FovAngle.from_degrees(123))
        path = tmp_path / f"ViewMap_Rand_FOV123.{ext}"
        write_map(vmap, path)
        back = read_map(path)
        assert isinstance(back, ViewMap)
        assert np.array_equal(
            back.image.data.view(np.uint32), vmap.image.data.view(np.uint32))
        assert back.fov.noted_degrees == 123

    @pytest.mark.parametrize("ext", ["exr", "tif"])
    def test_footage_map_bit_exact(self, tmp_path, rng, ext):
        data = random_buffer(rng, 12, 12, 4, extremes=False)
        data[:, :, 3] = (data[:, :, 3] > 0).astype(np.float32)
        fmap = FootageMap(ImageBuffer(data), FovAngle.from_degrees(180))
        path = tmp_path / f"FootageMap_Rand_FOV180.{ext}"
        write_map(fmap, path)
        back = read_map(path)
        assert isinstance(back, FootageMap)
        assert np.array_equal(
            back.image.data.view(np.uint32), fmap.image.data.view(np.uint32))

    @pytest.mark.parametrize("ext", ["exr", "tif"])
    @pytest.mark.parametrize("channels", [1, 2, 3, 4])
    def test_generic_image_bit_exact(self, tmp_path, rng, ext, channels):
        data = random_buffer(rng, 31, 18, channels)
        path = tmp_path / f"image.{ext}"
        write_image(path, ImageBuffer(data))
        back = read_image(path)
        assert np.array_equal(back.data.view(np.uint32), data.view(np.uint32))

    def test_normalized_flag_round_trip(self, tmp_path):
        params = ProjectionParams(omega=math.radians(90), k_x=0.5, k_y_top=0.5,
                                  k_y_bottom=0.5)
        vmap = normalize_fov(generate_view_map(params, 8, 8), math.radians(92))
        path = tmp_path / map_filename(vmap, "Cooke14mm_WideAngle", "tif")
        assert path.name == "ViewMap_Cooke14mm_WideAngle_nFOV92.tif"
        write_map(vmap, path)
        back = read_map(path)
        assert back.normalized

    def test_exr_multi_block_sizes(self, tmp_path, rng):
        # cross the 16-scanline ZIP block boundary
        for h in (15, 16, 17, 40):
            data = rng.uniform(0, 1, (h, 5, 3)).astype(np.float32)
            path = tmp_path / f"block{h}.exr"
            write_image(path, ImageBuffer(data))
            assert np.array_equal(read_image(path).data, data)


class TestFormatErrors:
    def test_sixteen_bit_tiff_rejected(self, tmp_path):
        path = tmp_path / "ViewMap_Deep_FOV90.tif"
        tifffile.imwrite(path, np.zeros((4, 4, 2), dtype=np.uint16),
                         photometric="minisblack")
        with pytest.raises(FileFormatError, match="bit depth"):
            read_map(path)

    def test_half_float_exr_rejected(self, tmp_path):
        # hand-built header with a HALF channel; the reader must refuse it
        path = tmp_path / "half.exr"
        chlist = b"R\0" + struct.pack("<iBBBBii", 1, 0, 0, 0, 0, 1, 1) + b"\0"
        attrs = b"channels\0chlist\0" + struct.pack("<i", len(chlist)) + chlist
        attrs += b"compression\0compression\0" + struct.pack("<iB", 1, 0)
        box = struct.pack("<4i", 0, 0, 3, 3)
        attrs += b"dataWindow\0box2i\0" + struct.pack("<i", 16) + box
        attrs += b"displayWindow\0box2i\0" + struct.pack("<i", 16) + box
        attrs += b"lineOrder\0lineOrder\0" + struct.pack("<iB", 1, 0)
        path.write_bytes(struct.pack("<ii", 20000630, 2) + attrs + b"\0")
        with pytest.raises(FileFormatError, match="half"):
            read_image(path)

    def test_wrong_channel_count_for_declared_type(self, tmp_path, rng):
        path = tmp_path / "FootageMap_Bad_FOV90.exr"
        write_image(path, ImageBuffer(rng.uniform(0, 1, (4, 4, 3)).astype(np.float32)))
        with pytest.raises(FileFormatError, match="channels"):
            read_map(path)
        path2 = tmp_path / "ViewMap_Bad_FOV90.exr"
        write_image(path2, ImageBuffer(rng.uniform(0, 1, (4, 4, 4)).astype(np.float32)))
        with pytest.raises(FileFormatError, match="channels"):
            read_map(path2)

    def test_write_map_validates_name_consistency(self, tmp_path):
        params = ProjectionParams(omega=math.radians(90), k_x=0.0)
        vmap = generate_view_map(params, 8, 8)
        with pytest.raises(FilenameError):
            write_map(vmap, tmp_path / "FootageMap_Wrong_FOV90.exr")
        with pytest.raises(FilenameError):
            write_map(vmap, tmp_path / "ViewMap_Wrong_FOV91.exr")
        with pytest.raises(FilenameError):
            write_map(vmap, tmp_path / "ViewMap_Wrong_nFOV90.exr")

    def test_missing_fov_token_cannot_be_written_or_read(self, tmp_path):
        params = ProjectionParams(omega=math.radians(90), k_x=0.0)
        fmap = generate_footage_map(params, 8)
        with pytest.raises(FilenameError, match="FOV"):
            write_map(fmap, tmp_path / "FootageMap_NoLabel.exr")


class TestScanlineOrder:
    def test_memory_is_bottom_up(self, tmp_path):
        # mark the top-left of the picture; the array stores it in the last row
        data = np.zeros((4, 4, 3), dtype=np.float32)
        data[-1, 0, 0] = 1.0  # top scanline in memory
        path = tmp_path / "mark.exr"
        write_image(path, ImageBuffer(data))
        raw = _exr.read(path)  # disk order: top-down
        assert raw[0, 0, 0] == 1.0
        assert np.array_equal(read_image(path).data, data)
