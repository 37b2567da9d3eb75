"""Textured ellipsoid phantoms standing in for LV segmentations."""
from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import DegenerateShape
from .volume import Mask3, VoxelGrid3

MIN_ELONGATION = 1.1


def make_ellipsoid_phantom(
    dims=(64, 64, 64),
    spacing=(1.0, 1.0, 1.0),
    semi_axes=(18.0, 18.0, 28.0),
    center=None,
    euler_orientation=(0.0, 0.0, 0.0),
    texture_period=20.0,
    origin=(0.0, 0.0, 0.0),
):
    """Build a ``(VoxelGrid3, Mask3)`` pair holding a rotated solid ellipsoid.

    ``semi_axes`` (mm) are along the local x, y, z axes before rotation by the
    extrinsic xyz Euler angles ``euler_orientation`` (radians). ``center``
    defaults to the middle of the lattice. Inside the ellipsoid the intensity
    is ``200 + 100 * cos(kx) cos(ky) cos(kz)`` with ``k = 2 pi / texture_period``
    measured from the center, so values span [100, 300]; outside it is 0.
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3 or min(dims) < 16:
        raise ValueError(f"phantom dims must be >= 16 per side, got {dims}")
    semi = np.asarray(semi_axes, dtype=np.float64)
    if semi.shape != (3,) or not np.all(semi > 0):
        raise ValueError(f"semi_axes must be three positive lengths, got {semi_axes!r}")
    if texture_period <= 0:
        raise ValueError("texture_period must be positive")
    ordered = np.sort(semi)
    if ordered[2] < MIN_ELONGATION * ordered[1]:
        raise DegenerateShape(
            f"longest semi-axis must exceed the second by {MIN_ELONGATION - 1:.0%}, got {tuple(semi)}"
        )

    # lattice holder gives us the float32-rounded spacing/origin
    blank = Mask3(np.zeros(dims, bool), spacing, origin)
    if center is None:
        center = blank.index_to_point((np.asarray(dims) - 1) / 2.0)
    center = np.asarray(center, dtype=np.float64)

    rel = blank.voxel_centers() - center
    rot = Rotation.from_euler("xyz", euler_orientation).as_matrix()
    local = rel @ rot  # rows are R^T (p - c)
    inside = np.sum((local / semi) ** 2, axis=-1) <= 1.0

    k = 2 * np.pi / texture_period
    texture = 200.0 + 100.0 * np.prod(np.cos(k * rel), axis=-1)
    image = np.where(inside, texture, 0.0)
    return (
        VoxelGrid3(image.astype(np.float32), blank.spacing, blank.origin),
        Mask3(inside, blank.spacing, blank.origin),
    )


def box_mask(dims, lo, hi, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Mask with the half-open index box ``lo <= idx < hi`` set."""
    data = np.zeros(dims, bool)
    data[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
    return Mask3(data, spacing, origin)
