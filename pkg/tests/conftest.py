import math

import numpy as np
import pytest

from ldes.core import ProjectionParams, TexCoord
from ldes.calibrate import Correspondence
from ldes.projection import _forward_arrays, unit_vectors_from_angles


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_correspondences(params: ProjectionParams, n: int, rng, margin: float = 0.08):
    """Synthetic gimbal-style measurements: random in-frame pixels forwarded
    through the model to their incidence directions."""
    st = rng.uniform(margin, 1.0 - margin, (n, 2))
    v = np.stack(
        [2.0 * st[:, 0] - 1.0, (2.0 * st[:, 1] - 1.0) / params.aspect], axis=-1
    )
    fwd = _forward_arrays(v, params)
    assert fwd["valid"].all()
    dirs = unit_vectors_from_angles(fwd["theta"], fwd["phi"])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return [Correspondence(TexCoord(*st[i]), dirs[i]) for i in range(n)]


# Five parameter sets spanning the model space: rectilinear, fisheye,
# anamorphic, aximorphic, vertically asymmetric.
def spanning_params():
    return {
        "rectilinear": ProjectionParams(omega=math.radians(100), k_x=1.0,
                                        k_y_top=1.0, k_y_bottom=1.0),
        "fisheye": ProjectionParams(omega=math.radians(180), k_x=-0.5,
                                    k_y_top=-0.5, k_y_bottom=-0.5),
        "anamorphic": ProjectionParams(omega=math.radians(140), k_x=0.5,
                                       k_y_top=0.5, k_y_bottom=0.5, squeeze=2.0),
        "aximorphic": ProjectionParams(omega=math.radians(160), k_x=0.5,
                                       k_y_top=0.0, k_y_bottom=0.0),
        "asymmetric": ProjectionParams(omega=math.radians(150), k_x=0.0,
                                       k_y_top=-0.5, k_y_bottom=0.3),
    }
