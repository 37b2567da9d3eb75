"""scikit-learn style wrappers around the frame/deform/warp functions.

``LVDeformer`` learns the LV frame from a segmentation passed as ``y`` and
then warps any intensity volume on the same lattice::

    deformer = LVDeformer(radial_ratio=0.91, longitudinal_ratio=0.9, torsion_deg=20)
    warped = deformer.fit_transform(image, mask)
    flow = deformer.flow_
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .calibration import calibrate_radial, volume_ratio
from .deform import DeformParams, analytic_flow
from .frame import compute_frame
from .validation import check_grid, check_mask
from .warp import warp_pair


class LVDeformer(TransformerMixin, BaseEstimator):
    """Radial/longitudinal/torsional LV deformation as a transformer.

    Parameters
    ----------
    radial_ratio, longitudinal_ratio : float
        Scale factors in (0, 2] across and along the long axis.
    torsion_deg : float
        Twist difference between the two axial ends of the LV, in [0, 90].
    torsion_center : float
        Axial fraction in [0, 1] with zero twist.
    boundary_falloff_voxels : int
        Width of the optional blending shell outside the warped LV.

    Attributes
    ----------
    frame_ : LVFrame
    mask_ : Mask3
        Segmentation seen in :meth:`fit`.
    flow_ : FlowField3
        Forward GT flow on the fitted mask. Use :meth:`warp` for the deformed
        segmentation.
    """

    def __init__(self, radial_ratio=0.91, longitudinal_ratio=0.9, torsion_deg=0.0,
                 torsion_center=0.5, boundary_falloff_voxels=0):
        self.radial_ratio = radial_ratio
        self.longitudinal_ratio = longitudinal_ratio
        self.torsion_deg = torsion_deg
        self.torsion_center = torsion_center
        self.boundary_falloff_voxels = boundary_falloff_voxels

    def _params(self):
        return DeformParams(self.radial_ratio, self.longitudinal_ratio,
                            self.torsion_deg, self.torsion_center)

    def fit(self, X, y):
        grid = check_grid(X)
        mask = check_mask(y, like=grid)
        self.params_ = self._params()
        self.mask_ = mask
        self.frame_ = compute_frame(mask)
        self.flow_ = analytic_flow(grid, mask, self.params_, self.frame_)
        return self

    def warp(self, X):
        """Full ``(warped_grid, warped_mask, flow)`` triple for ``X``."""
        check_is_fitted(self, "frame_")
        grid = check_grid(X, self.mask_.spacing, self.mask_.origin)
        check_mask(self.mask_, like=grid)
        return warp_pair(grid, self.mask_, self.params_, self.frame_,
                         self.boundary_falloff_voxels)

    def transform(self, X):
        return self.warp(X)[0]

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).transform(X)

    def volume_ratio(self):
        check_is_fitted(self, "frame_")
        return volume_ratio(self.mask_, self.params_, self.frame_)


class RadialCalibrator(BaseEstimator):
    """Finds the radial ratio whose warp matches ``target_volume_ratio``.

    ``fit(mask)`` sets ``radial_ratio_``, ``volume_ratio_`` and ``frame_``.
    """

    def __init__(self, target_volume_ratio=0.745, longitudinal_ratio=0.9, tol=1e-3, max_iter=60):
        self.target_volume_ratio = target_volume_ratio
        self.longitudinal_ratio = longitudinal_ratio
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        mask = check_mask(X)
        self.frame_ = compute_frame(mask)
        self.radial_ratio_ = calibrate_radial(self.target_volume_ratio, self.longitudinal_ratio,
                                              mask, self.frame_, self.tol, self.max_iter)
        params = DeformParams(self.radial_ratio_, self.longitudinal_ratio, 0.0, 0.5)
        self.volume_ratio_ = volume_ratio(mask, params, self.frame_)
        return self

    def to_deformer(self, **kwargs):
        """An :class:`LVDeformer` carrying the calibrated ratios."""
        check_is_fitted(self, "radial_ratio_")
        return LVDeformer(radial_ratio=self.radial_ratio_,
                          longitudinal_ratio=self.longitudinal_ratio, **kwargs)
