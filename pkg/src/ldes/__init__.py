"""Lens distortion encoding toolkit.

Distortion profiles are carried by two 32-bit float STMap textures: a view
map (output-shaped, values address equidistant space normalized by an FOV
angle) and a footage map (square, values address the footage directly, alpha
marks coverage). Sampling the footage map through the view map bakes the
final footage-warping STMap. View maps from different lenses can be blended,
FOV-normalized, rotated or exported as ray maps; the projection module
synthesizes both map types from a parametric lens model, and the calibrate
module fits that model to measured data.
"""

from .core import (
    BrownConradyParams,
    ConvergenceError,
    FileFormatError,
    FilenameError,
    FootageMap,
    FovAngle,
    ImageBuffer,
    LdesError,
    ModelDomainError,
    ProjectionParams,
    TexCoord,
    ViewMap,
    centered_coords,
    centered_grid,
)
from .projection import (
    SphericalDirection,
    anamorphic_radius,
    aximorphic_theta,
    aximorphic_weights,
    brown_conrady,
    forward_model,
    inverse_model,
    load_params,
    natural_vignette,
    radius_from_theta,
    save_params,
    select_k_y,
    theta_from_radius,
    theta_max,
)
from .mapgen import (
    default_footage_size,
    derive_footage_map,
    generate_footage_map,
    generate_view_map,
)
from .transform import (
    blend_view_maps,
    normalize_fov,
    rotate_view_map,
    tile_scale,
    view_map_to_rays,
)
from .resample import (
    BILINEAR,
    CATMULL_ROM,
    SampleFilter,
    apply_stmap,
    bake,
    sample,
    sample_grid,
    vignette_divide,
    vignette_multiply,
)
from .io import (
    LdesFilename,
    format_filename,
    map_filename,
    parse_filename,
    read_image,
    read_map,
    write_image,
    write_map,
)
from .calibrate import (
    Correspondence,
    FitConfig,
    FitReport,
    fit,
    read_correspondences,
    write_correspondences,
)

__version__ = "0.1.0"
