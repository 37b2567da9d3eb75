"""Input coercion helpers for the estimator API."""
from __future__ import annotations

import numpy as np

from .errors import EmptyMask
from .volume import FlowField3, Mask3, VoxelGrid3, check_same_lattice


def check_grid(X, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Accept a :class:`VoxelGrid3` or a 3D array (wrapped with ``spacing``/``origin``)."""
    if isinstance(X, VoxelGrid3):
        return X
    if isinstance(X, (Mask3, FlowField3)):
        raise TypeError(f"expected an intensity grid, got {type(X).__name__}")
    arr = np.asarray(X)
    if arr.ndim != 3:
        raise ValueError(f"expected a 3D array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number) and arr.dtype != bool:
        raise TypeError(f"expected numeric data, got dtype {arr.dtype}")
    return VoxelGrid3(arr, spacing, origin)


def check_mask(y, like=None, require_nonempty=True):
    """Coerce ``y`` to a :class:`Mask3`, borrowing the lattice of ``like`` for raw arrays."""
    if isinstance(y, Mask3):
        mask = y
    else:
        arr = np.asarray(y)
        if arr.ndim != 3:
            raise ValueError(f"expected a 3D mask, got shape {arr.shape}")
        if arr.dtype != bool and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be 0 or 1")
        spacing = like.spacing if like is not None else (1.0, 1.0, 1.0)
        origin = like.origin if like is not None else (0.0, 0.0, 0.0)
        mask = Mask3(arr.astype(bool), spacing, origin)
    if like is not None:
        check_same_lattice(like, mask)
    if require_nonempty and mask.count == 0:
        raise EmptyMask("mask has no set voxels")
    return mask
