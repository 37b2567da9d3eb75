"""Lattice-carrying volume containers.

Arrays are indexed ``data[i, j, k]`` with ``i`` along x. Voxel index ``v``
sits at the physical point ``origin + v * spacing`` (mm). Spacing and origin
are rounded to float32 on construction so that every container survives a
trip through the on-disk formats unchanged.
"""
from __future__ import annotations

import numpy as np

from .errors import LatticeMismatch


def _f32_triple(values, name, positive=False):
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have three components, got {values!r}")
    arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {values!r}")
    if positive and not np.all(arr > 0):
        raise ValueError(f"{name} must be strictly positive, got {values!r}")
    return tuple(float(x) for x in arr)


def _frozen(array):
    array.setflags(write=False)
    return array


class _Lattice:
    """Shared metadata and geometry helpers."""

    __slots__ = ("data", "spacing", "origin")

    _dtype = None
    _trailing = ()

    def __init__(self, data, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
        arr = np.array(data, dtype=self._dtype, copy=True)
        if arr.ndim != 3 + len(self._trailing) or arr.shape[3:] != self._trailing:
            raise ValueError(
                f"{type(self).__name__} expects shape (nx, ny, nz{', 3' if self._trailing else ''}), "
                f"got {arr.shape}"
            )
        if min(arr.shape[:3]) < 1:
            raise ValueError(f"dims must be positive, got {arr.shape[:3]}")
        if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
            raise ValueError("data must be finite")
        object.__setattr__(self, "data", _frozen(arr))
        object.__setattr__(self, "spacing", _f32_triple(spacing, "spacing", positive=True))
        object.__setattr__(self, "origin", _f32_triple(origin, "origin"))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __reduce__(self):
        return (type(self), (self.data, self.spacing, self.origin))

    @property
    def dims(self):
        return tuple(int(n) for n in self.data.shape[:3])

    @property
    def voxel_volume(self):
        sx, sy, sz = self.spacing
        return sx * sy * sz

    def same_lattice(self, other):
        return (
            self.dims == other.dims
            and self.spacing == other.spacing
            and self.origin == other.origin
        )

    def index_to_point(self, index):
        """Physical position (mm) of (possibly fractional) voxel indices."""
        return np.asarray(self.origin) + np.asarray(index, dtype=np.float64) * np.asarray(self.spacing)

    def point_to_index(self, point):
        return (np.asarray(point, dtype=np.float64) - np.asarray(self.origin)) / np.asarray(self.spacing)

    def voxel_centers(self):
        """All voxel centers as an ``(nx, ny, nz, 3)`` float64 array."""
        axes = [
            o + s * np.arange(n, dtype=np.float64)
            for o, s, n in zip(self.origin, self.spacing, self.dims)
        ]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.same_lattice(other) and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self):
        return (
            f"{type(self).__name__}(dims={self.dims}, spacing={self.spacing}, "
            f"origin={self.origin})"
        )


class VoxelGrid3(_Lattice):
    """Scalar intensity volume, stored as float32."""

    __slots__ = ()
    _dtype = np.float32

    def with_data(self, data):
        return VoxelGrid3(data, self.spacing, self.origin)


class Mask3(_Lattice):
    """Binary segmentation on a voxel lattice."""

    __slots__ = ()
    _dtype = bool

    @property
    def count(self):
        return int(np.count_nonzero(self.data))

    def with_data(self, data):
        return Mask3(data, self.spacing, self.origin)


class FlowField3(_Lattice):
    """Per-voxel displacement ``(dx, dy, dz)`` in millimeters, float32."""

    __slots__ = ()
    _dtype = np.float32
    _trailing = (3,)

    @classmethod
    def zeros_like(cls, other):
        return cls(np.zeros(other.dims + (3,), dtype=np.float32), other.spacing, other.origin)


def check_same_lattice(a, b):
    if not a.same_lattice(b):
        raise LatticeMismatch(f"lattice mismatch: {a!r} vs {b!r}")
