"""Backward warping of LV volumes and flow evaluation."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .deform import analytic_flow, forward_displacement, inverse_displacement
from .errors import EmptyMask
from .volume import Mask3, check_same_lattice


def _clamp_index(idx, dims):
    return np.clip(idx, 0.0, np.asarray(dims, dtype=np.float64) - 1.0)


def trilinear_at_index(data, idx):
    """Trilinear interpolation of ``data`` at fractional indices ``(..., 3)``.

    Indices are edge-clamped to the outermost voxel centers; integer indices
    reproduce voxel values exactly.
    """
    data = np.asarray(data)
    dims = data.shape[:3]
    idx = _clamp_index(np.asarray(idx, dtype=np.float64), dims)
    upper = np.maximum(np.asarray(dims) - 2, 0)
    lo = np.minimum(np.floor(idx).astype(np.intp), upper)
    frac = idx - lo
    hi = np.minimum(lo + 1, np.asarray(dims) - 1)

    out = 0.0
    for cx in (0, 1):
        ix = hi[..., 0] if cx else lo[..., 0]
        wx = frac[..., 0] if cx else 1.0 - frac[..., 0]
        for cy in (0, 1):
            iy = hi[..., 1] if cy else lo[..., 1]
            wy = frac[..., 1] if cy else 1.0 - frac[..., 1]
            for cz in (0, 1):
                iz = hi[..., 2] if cz else lo[..., 2]
                wz = frac[..., 2] if cz else 1.0 - frac[..., 2]
                out = out + data[ix, iy, iz].astype(np.float64) * (wx * wy * wz)
    return out


def nearest_at_index(data, idx):
    """Nearest-voxel lookup; halves round away from zero, indices edge-clamped."""
    data = np.asarray(data)
    idx = np.asarray(idx, dtype=np.float64)
    rounded = np.sign(idx) * np.floor(np.abs(idx) + 0.5)
    rounded = _clamp_index(rounded, data.shape[:3]).astype(np.intp)
    return data[rounded[..., 0], rounded[..., 1], rounded[..., 2]]


def trilinear_sample(grid, points):
    """Interpolated intensity at physical points (mm)."""
    return trilinear_at_index(grid.data, grid.point_to_index(points))


def nearest_sample(mask, points):
    return nearest_at_index(mask.data, mask.point_to_index(points))


def _backward_index_shift(lattice, params, frame):
    centers = lattice.voxel_centers()
    disp = inverse_displacement(centers, params, frame)
    index = np.stack(np.indices(lattice.dims), axis=-1).astype(np.float64)
    return index, disp / np.asarray(lattice.spacing)


def warp_mask(mask, params, frame):
    """Deformed mask only (cheap path used for volume measurement)."""
    index, shift = _backward_index_shift(mask, params, frame)
    return mask.with_data(nearest_at_index(mask.data, index + shift))


def warp_pair(grid, mask, params, frame, boundary_falloff_voxels=0):
    """Warp a frame and its LV mask; returns ``(warped_grid, warped_mask, gt_flow)``.

    Each target voxel is pulled back through the inverse map. If the source
    point falls inside the LV mask the voxel takes the interpolated source
    intensity and joins the warped mask; otherwise it keeps its original
    value. ``boundary_falloff_voxels`` > 0 adds a shell outside the warped
    mask in which the pull-back displacement is blended linearly to zero
    over that many voxels, softening the seam left by a shrinking LV.
    """
    check_same_lattice(grid, mask)
    if boundary_falloff_voxels < 0:
        raise ValueError("boundary_falloff_voxels must be >= 0")
    index, shift = _backward_index_shift(mask, params, frame)
    source = index + shift
    inside = nearest_at_index(mask.data, source).astype(bool)

    out = grid.data.copy()
    # voxels with zero pull-back keep their stored bits
    moving = inside & np.any(shift != 0, axis=-1)
    out[moving] = trilinear_at_index(grid.data, source[moving]).astype(np.float32)

    if boundary_falloff_voxels > 0 and inside.any():
        dist = ndimage.distance_transform_edt(~inside)
        weight = np.clip(1.0 - dist / boundary_falloff_voxels, 0.0, 1.0)
        shell = ~inside & (weight > 0)
        blended = index[shell] + weight[shell][:, None] * shift[shell]
        out[shell] = trilinear_at_index(grid.data, blended).astype(np.float32)

    return (
        grid.with_data(out),
        mask.with_data(inside),
        analytic_flow(grid, mask, params, frame),
    )


def endpoint_error(est, gt, mask):
    """Mean and median Euclidean distance (mm) between two flows over the mask."""
    check_same_lattice(est, gt)
    check_same_lattice(est, mask)
    if mask.count == 0:
        raise EmptyMask("endpoint error needs a non-empty mask")
    sel = mask.data
    diff = est.data[sel].astype(np.float64) - gt.data[sel].astype(np.float64)
    err = np.sqrt(np.sum(diff * diff, axis=-1))
    return float(err.mean()), float(np.median(err))


def forward_points(mask, params, frame):
    """Source voxel centers of ``mask`` and their forward images (mm)."""
    idx = np.argwhere(mask.data)
    p = mask.index_to_point(idx)
    return idx, p + forward_displacement(p, params, frame)


def warp_consistency(grid, mask, warped_grid, warped_mask, params, frame, rel_tol=0.02):
    """Fraction of interior-mapped mask voxels whose intensity survives the warp.

    A source voxel counts when its forward image rounds to a voxel inside the
    warped mask eroded by one voxel; it passes when the warped image sampled
    there matches the source value within ``rel_tol`` of the grid's range.
    Returns ``(fraction_passing, n_checked)``.
    """
    idx, fwd = forward_points(mask, params, frame)
    interior = Mask3(
        ndimage.binary_erosion(warped_mask.data, structure=np.ones((3, 3, 3), bool)),
        warped_mask.spacing,
        warped_mask.origin,
    )
    keep = nearest_sample(interior, fwd).astype(bool)
    if not keep.any():
        return 0.0, 0
    src = grid.data[tuple(idx[keep].T)].astype(np.float64)
    got = trilinear_sample(warped_grid, fwd[keep])
    span = float(np.ptp(grid.data))
    ok = np.abs(got - src) <= rel_tol * span
    return float(ok.mean()), int(keep.sum())
