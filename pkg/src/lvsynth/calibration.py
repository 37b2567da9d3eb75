"""Radial-ratio calibration against a target LV volume ratio."""
from __future__ import annotations

import logging
import math

from .deform import DeformParams
from .errors import EmptyMask, NoBracket, NoConvergence
from .warp import warp_mask

logger = logging.getLogger(__name__)

RADIAL_BRACKET = (0.5, 1.5)


def measure_volume(mask):
    """Segmented volume in mm^3 (voxel count times voxel volume)."""
    n = mask.count
    if n == 0:
        raise EmptyMask("cannot measure an empty mask")
    return n * mask.voxel_volume


def volume_ratio(mask, params, frame):
    """Warped-mask volume over source-mask volume."""
    source = measure_volume(mask)
    return measure_volume(warp_mask(mask, params, frame)) / source


def calibrate_radial(target_ratio, longitudinal_ratio, mask, frame, tol=1e-3, max_iter=60,
                     xtol=1e-9):
    """Solve for the radial ratio that reproduces ``target_ratio``.

    The warped volume grows monotonically with the radial ratio, so the root
    is found by bisection on ``RADIAL_BRACKET``. The first probe is the
    analytic guess ``sqrt(target / longitudinal)`` from the Jacobian
    ``r_r**2 * r_l``; it usually lands within a few voxels of the answer and
    splits the bracket unevenly in our favor.

    Voxel counting makes the ratio a step function; on symmetric masks whole
    rings of voxels flip at once and no radial ratio may land within ``tol``.
    When the bracket narrows below ``xtol`` the target sits on such a step and
    the side with the smaller residual is returned (with a warning).
    """
    if not target_ratio > 0:
        raise ValueError(f"target_ratio must be positive, got {target_ratio!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def residual(r):
        p = DeformParams(r, longitudinal_ratio, 0.0, 0.5)
        return volume_ratio(mask, p, frame) - target_ratio

    lo, hi = RADIAL_BRACKET
    f_lo, f_hi = residual(lo), residual(hi)
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi
    if f_lo > 0 or f_hi < 0:
        raise NoBracket(
            f"target volume ratio {target_ratio} not reachable with radial ratio in "
            f"[{lo}, {hi}] (range {f_lo + target_ratio:.4f}..{f_hi + target_ratio:.4f})"
        )

    guess = math.sqrt(target_ratio / longitudinal_ratio)
    r = guess if lo < guess < hi else 0.5 * (lo + hi)
    for it in range(max_iter):
        f = residual(r)
        logger.debug("calibrate iter %d: r_r=%.9f residual=%.3g", it, r, f)
        if abs(f) <= tol:
            return r
        if f < 0:
            lo, f_lo = r, f
        else:
            hi, f_hi = r, f
        if hi - lo < xtol:
            best, f_best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
            logger.warning(
                "volume ratio jumps by %.4g at r_r=%.6f; closest reachable residual is %.4g",
                f_hi - f_lo, best, f_best,
            )
            return best
        r = 0.5 * (lo + hi)
    raise NoConvergence(f"no radial ratio within {tol} of {target_ratio} after {max_iter} iterations")
