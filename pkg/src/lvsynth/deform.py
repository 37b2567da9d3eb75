"""Parametric LV deformation in frame-cylindrical coordinates.

A point with cylindrical coordinates ``(rho, phi, z)`` maps to
``(radial_ratio * rho, phi + tau(z), longitudinal_ratio * z)`` where the
twist ``tau`` grows linearly along the axis, is zero at the torsion center and
differs by the torsion angle between the two axial extremes. The twist is
evaluated at the source ``z``, so the map has a closed-form inverse.

Internally everything is computed as a displacement so that identity
parameters give exactly zero motion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .volume import FlowField3, check_same_lattice


@dataclass(frozen=True)
class DeformParams:
    radial_ratio: float = 1.0
    longitudinal_ratio: float = 1.0
    torsion_deg: float = 0.0
    torsion_center: float = 0.5

    def __post_init__(self):
        for name in ("radial_ratio", "longitudinal_ratio"):
            value = getattr(self, name)
            if not (np.isfinite(value) and 0 < value <= 2):
                raise ValueError(f"{name} must lie in (0, 2], got {value!r}")
        if not (np.isfinite(self.torsion_deg) and 0 <= self.torsion_deg <= 90):
            raise ValueError(f"torsion_deg must lie in [0, 90], got {self.torsion_deg!r}")
        if not (np.isfinite(self.torsion_center) and 0 <= self.torsion_center <= 1):
            raise ValueError(f"torsion_center must lie in [0, 1], got {self.torsion_center!r}")
        for name in ("radial_ratio", "longitudinal_ratio", "torsion_deg", "torsion_center"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def is_identity(self):
        return self.radial_ratio == 1 and self.longitudinal_ratio == 1 and self.torsion_deg == 0

    def to_dict(self):
        return {
            "radial_ratio": self.radial_ratio,
            "longitudinal_ratio": self.longitudinal_ratio,
            "torsion_deg": self.torsion_deg,
            "torsion_center": self.torsion_center,
        }


def axial_fraction(z, frame):
    """Normalized axial position, clamped to [0, 1]."""
    s = (np.asarray(z, dtype=np.float64) - frame.z_min) / (frame.z_max - frame.z_min)
    return np.clip(s, 0.0, 1.0)


def torsion_angle(z, params, frame):
    """Twist (radians) applied at source axial coordinate ``z`` (mm)."""
    return np.radians(params.torsion_deg) * (axial_fraction(z, frame) - params.torsion_center)


def _split(points, frame):
    d = np.asarray(points, dtype=np.float64) - frame.com
    z = d @ frame.axis
    radial = d - z[..., None] * frame.axis
    return z, radial


def _rotate(radial, angle, axis):
    # Rodrigues for vectors orthogonal to the axis; cos(0)=1, sin(0)=0 keeps identity exact
    c = np.cos(angle)[..., None]
    s = np.sin(angle)[..., None]
    return radial * c + np.cross(axis, radial) * s


def forward_displacement(points, params, frame):
    """``forward_map(p) - p`` for points ``(..., 3)``, in mm."""
    z, radial = _split(points, frame)
    tau = torsion_angle(z, params, frame)
    moved = params.radial_ratio * _rotate(radial, tau, frame.axis)
    dz = (params.longitudinal_ratio * z - z)[..., None] * frame.axis
    return dz + (moved - radial)


def inverse_displacement(points, params, frame):
    """``inverse_map(q) - q`` for points ``(..., 3)``, in mm."""
    z_t, radial_t = _split(points, frame)
    z_s = z_t / params.longitudinal_ratio
    tau = torsion_angle(z_s, params, frame)
    source = _rotate(radial_t, -tau, frame.axis) / params.radial_ratio
    dz = (z_s - z_t)[..., None] * frame.axis
    return dz + (source - radial_t)


def forward_map(points, params, frame):
    p = np.asarray(points, dtype=np.float64)
    return p + forward_displacement(p, params, frame)


def inverse_map(points, params, frame):
    q = np.asarray(points, dtype=np.float64)
    return q + inverse_displacement(q, params, frame)


def analytic_flow(grid, mask, params, frame):
    """Forward displacement at every mask voxel, zero elsewhere (GT flow)."""
    check_same_lattice(grid, mask)
    flow = np.zeros(mask.dims + (3,), dtype=np.float32)
    idx = np.nonzero(mask.data)
    points = mask.index_to_point(np.stack(idx, axis=-1))
    flow[idx] = forward_displacement(points, params, frame)
    return FlowField3(flow, mask.spacing, mask.origin)
