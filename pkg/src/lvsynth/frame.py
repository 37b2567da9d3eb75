"""Anatomical LV coordinate frame and cylindrical coordinates.

The longitudinal axis is the principal component of the mask's voxel
centers (in mm), anchored at the mask's center of mass. Cylindrical
coordinates ``(rho, phi, z)`` are measured relative to that line, with
``phi = 0`` along a fixed in-plane reference vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateAxis, DegenerateFrame, EmptyMask

AXIS_GAP_TOL = 1e-6
_SIGN_TOL = 1e-12
_PARALLEL_TOL = 1e-9
_ON_AXIS_RHO = 1e-12


class CylCoord(NamedTuple):
    rho: np.ndarray
    phi: np.ndarray
    z: np.ndarray


def _fix_sign(axis):
    """Orient ``axis`` so z > 0, falling back to y then x when components vanish."""
    for comp in (2, 1, 0):
        if abs(axis[comp]) > _SIGN_TOL:
            return axis if axis[comp] > 0 else -axis
    return axis


def _azimuth_basis(axis):
    for u in np.eye(3):
        e1 = u - np.dot(u, axis) * axis
        norm = np.linalg.norm(e1)
        if norm > _PARALLEL_TOL:
            e1 = e1 / norm
            # second pass: a nearly parallel u leaves e1 off-orthogonal by ~eps/norm
            e1 = e1 - np.dot(e1, axis) * axis
            e1 = e1 / np.linalg.norm(e1)
            return e1, np.cross(axis, e1)
    raise DegenerateFrame("cannot build an azimuth reference")  # unreachable for unit axes


@dataclass(frozen=True, eq=False)
class LVFrame:
    """Center of mass, unit long axis and axial extent of an LV mask.

    ``z_min``/``z_max`` are the extreme projections (mm) of mask voxel centers
    onto ``axis``, measured from ``com``.
    """

    com: np.ndarray
    axis: np.ndarray
    z_min: float
    z_max: float
    e1: np.ndarray = field(init=False, repr=False)
    e2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        com = np.array(self.com, dtype=np.float64).reshape(3)
        axis = np.array(self.axis, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ValueError(f"axis must be a unit vector, got {axis}")
        if not self.z_min < self.z_max:
            raise DegenerateFrame(f"z_min {self.z_min} must be below z_max {self.z_max}")
        e1, e2 = _azimuth_basis(axis)
        for name, value in (("com", com), ("axis", axis), ("e1", e1), ("e2", e2)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "z_min", float(self.z_min))
        object.__setattr__(self, "z_max", float(self.z_max))

    @property
    def length(self):
        return self.z_max - self.z_min

    def to_dict(self):
        return {
            "center_of_mass_mm": self.com.tolist(),
            "axis": self.axis.tolist(),
            "extent_mm": [self.z_min, self.z_max],
        }


def _set_indices(mask):
    idx = np.argwhere(mask.data)
    if len(idx) == 0:
        raise EmptyMask("mask has no set voxels")
    return idx


def center_of_mass(mask):
    """Unweighted mean of the physical centers of set voxels (mm)."""
    idx = _set_indices(mask)
    # integer sums are exact, so the result is independent of voxel order
    mean_idx = np.array([int(s) for s in idx.sum(axis=0)], dtype=np.float64) / len(idx)
    return np.asarray(mask.origin) + mean_idx * np.asarray(mask.spacing)


def covariance(mask):
    """3x3 covariance (mm^2) of set-voxel centers.

    Accumulated in exact integer arithmetic on indices, then scaled by the
    spacing, so it is invariant to voxel ordering and lattice translation.
    """
    idx = _set_indices(mask)
    n = len(idx)
    sums = [int(s) for s in idx.sum(axis=0)]
    i64 = idx.astype(np.int64)
    cov = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            sab = int(np.dot(i64[:, a], i64[:, b]))
            cov[a, b] = cov[b, a] = (n * sab - sums[a] * sums[b]) / (n * n)
    s = np.asarray(mask.spacing)
    return cov * np.outer(s, s)


def principal_axis(mask):
    """Unit eigenvector of the largest covariance eigenvalue, sign-fixed.

    Raises :class:`DegenerateAxis` when the top two eigenvalues are within a
    relative gap of 1e-6 (no preferred direction, e.g. a sphere).
    """
    if mask.count < 2:
        raise EmptyMask("principal axis needs at least two set voxels")
    evals, evecs = np.linalg.eigh(covariance(mask))
    lam1, lam2 = evals[2], evals[1]
    if lam1 <= 0 or (lam1 - lam2) / lam1 < AXIS_GAP_TOL:
        raise DegenerateAxis(f"top eigenvalues {lam1:.6g} and {lam2:.6g} are indistinguishable")
    axis = evecs[:, 2]
    return _fix_sign(axis / np.linalg.norm(axis))


def compute_frame(mask):
    com = center_of_mass(mask)
    axis = principal_axis(mask)
    centers = mask.index_to_point(_set_indices(mask))
    proj = (centers - com) @ axis
    z_min, z_max = float(proj.min()), float(proj.max())
    if z_max - z_min < np.finfo(float).eps * max(1.0, abs(z_max), abs(z_min)):
        raise DegenerateFrame("mask has no axial extent")
    return LVFrame(com, axis, z_min, z_max)


def to_cylindrical(points, frame):
    """Cartesian points ``(..., 3)`` (mm) to :class:`CylCoord` arrays."""
    d = np.asarray(points, dtype=np.float64) - frame.com
    z = d @ frame.axis
    radial = d - z[..., None] * frame.axis
    rho = np.linalg.norm(radial, axis=-1)
    phi = np.arctan2(radial @ frame.e2, radial @ frame.e1)
    phi = np.where(phi <= -np.pi, np.pi, phi)
    phi = np.where(rho < _ON_AXIS_RHO, 0.0, phi)
    return CylCoord(rho, phi, z)


def from_cylindrical(rho, phi, z, frame):
    rho, phi, z = (np.asarray(v, dtype=np.float64) for v in (rho, phi, z))
    return (
        frame.com
        + z[..., None] * frame.axis
        + (rho * np.cos(phi))[..., None] * frame.e1
        + (rho * np.sin(phi))[..., None] * frame.e2
    )
