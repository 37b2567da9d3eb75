"""Synthetic LV deformation data with dense ground-truth flow."""

from .calibration import calibrate_radial, measure_volume, volume_ratio
from .config import GenerationConfig, load_config, read_config, read_manifest, write_manifest
from .deform import (
    DeformParams,
    analytic_flow,
    axial_fraction,
    forward_map,
    inverse_map,
    torsion_angle,
)
from .estimators import LVDeformer, RadialCalibrator
from .frame import (
    CylCoord,
    LVFrame,
    center_of_mass,
    compute_frame,
    from_cylindrical,
    principal_axis,
    to_cylindrical,
)
from .io import read_flow, read_nifti, write_flow, write_nifti
from .phantom import make_ellipsoid_phantom
from .sweep import run_sweep
from .volume import FlowField3, Mask3, VoxelGrid3
from .warp import endpoint_error, nearest_sample, trilinear_sample, warp_pair

__version__ = "0.1.0"
