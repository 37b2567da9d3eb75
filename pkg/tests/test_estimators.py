import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lvsynth.deform import DeformParams
from lvsynth.estimators import LVDeformer, RadialCalibrator
from lvsynth.frame import compute_frame
from lvsynth.warp import warp_pair


def test_params_roundtrip():
    est = LVDeformer(radial_ratio=0.8, torsion_deg=12.0)
    params = est.get_params()
    assert params == {"radial_ratio": 0.8, "longitudinal_ratio": 0.9, "torsion_deg": 12.0,
                      "torsion_center": 0.5, "boundary_falloff_voxels": 0}
    other = clone(est).set_params(torsion_center=0.25)
    assert other.torsion_center == 0.25 and est.torsion_center == 0.5


def test_fit_transform_matches_functional(phantom32):
    grid, mask = phantom32
    est = LVDeformer(radial_ratio=0.91, longitudinal_ratio=0.9, torsion_deg=35.0)
    warped = est.fit_transform(grid, mask)
    ref = warp_pair(grid, mask, DeformParams(0.91, 0.9, 35.0, 0.5), compute_frame(mask))
    assert warped == ref[0]
    assert est.flow_ == ref[2]
    _, wmask, _ = est.warp(grid)
    assert wmask == ref[1]
    assert abs(est.volume_ratio() - wmask.count / mask.count) < 1e-12


def test_accepts_raw_arrays(phantom32):
    grid, mask = phantom32
    est = LVDeformer(radial_ratio=1.0, longitudinal_ratio=1.0).fit(np.asarray(grid.data), mask.data.astype(np.uint8))
    out = est.transform(np.asarray(grid.data))
    assert out.data.tobytes() == grid.data.tobytes()


def test_not_fitted(phantom32):
    with pytest.raises(NotFittedError):
        LVDeformer().transform(phantom32[0])


def test_invalid_params_raise_on_fit(phantom32):
    with pytest.raises(ValueError):
        LVDeformer(radial_ratio=5.0).fit(*phantom32)


def test_bad_mask_values(phantom32):
    grid, _ = phantom32
    with pytest.raises(ValueError):
        LVDeformer().fit(grid, np.full(grid.dims, 2))


def test_calibrator(phantom32):
    _, mask = phantom32
    cal = RadialCalibrator(target_volume_ratio=0.745, longitudinal_ratio=0.9).fit(mask)
    assert 0.85 < cal.radial_ratio_ < 0.97
    assert abs(cal.volume_ratio_ - 0.745) < 0.03
    deformer = cal.to_deformer(torsion_deg=20.0)
    assert deformer.radial_ratio == cal.radial_ratio_ and deformer.torsion_deg == 20.0
