"""Batch generation of synthetic sample pairs with a JSONL manifest."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .calibration import calibrate_radial
from .config import write_manifest
from .deform import DeformParams
from .errors import LVSynthError
from .frame import compute_frame
from .volume import check_same_lattice
from .warp import warp_pair

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
IMAGE_NAME = "image.nii"
MASK_NAME = "mask.nii"
FLOW_NAME = "flow.cvf"


class SampleFailed(LVSynthError):
    def __init__(self, sample_id, cause):
        # args carry both fields so the error survives the process pool's pickling
        super().__init__(sample_id, cause)
        self.sample_id = sample_id
        self.cause = cause

    def __str__(self):
        return f"sample {self.sample_id} failed: {self.cause}"


def render_sample(grid, mask, frame, params, out_dir, falloff=0):
    """Warp one sample and write image, mask and flow into ``out_dir``.

    Returns ``(paths, byte_sizes, measured_volume_ratio)``.
    """
    warped, wmask, flow = warp_pair(grid, mask, params, frame, falloff)
    out_dir = Path(out_dir)
    paths = {
        "image": out_dir / IMAGE_NAME,
        "mask": out_dir / MASK_NAME,
        "flow": out_dir / FLOW_NAME,
    }
    sizes = {
        "image": io.save(warped, paths["image"]),
        "mask": io.save(wmask, paths["mask"]),
        "flow": io.save(flow, paths["flow"]),
    }
    return paths, sizes, wmask.count / mask.count


_STATE = {}


def _init_worker(grid, mask, frame, falloff):
    _STATE.update(grid=grid, mask=mask, frame=frame, falloff=falloff)


def _run_one(job):
    sid, params, out_dir = job
    try:
        return render_sample(_STATE["grid"], _STATE["mask"], _STATE["frame"], params,
                             out_dir, _STATE["falloff"])
    except Exception as exc:  # re-raised in the parent with the sample id attached
        raise SampleFailed(sid, exc) from exc


def resolve_radial_ratio(config, mask, frame):
    if not config.auto_radial:
        return config.radial_ratio
    r = calibrate_radial(config.target_volume_ratio, config.longitudinal_ratio, mask, frame)
    logger.info("calibrated radial ratio %.6f for target volume ratio %.4f",
                r, config.target_volume_ratio)
    return r


def run_sweep(config, workers=1):
    """Generate every (torsion, center) sample of ``config``.

    Samples land in ``output_dir/<sample_id>/`` and the manifest is written to
    ``output_dir/manifest.jsonl`` in sweep order. Returns the manifest entries.
    """
    grid = io.load_grid(config.input_image)
    mask = io.load_mask(config.input_mask)
    check_same_lattice(grid, mask)
    frame = compute_frame(mask)
    radial = resolve_radial_ratio(config, mask, frame)

    out_root = Path(config.output_dir)
    plan = config.sweep_plan()
    jobs = [
        (sid, DeformParams(radial, config.longitudinal_ratio, t, c), out_root / sid)
        for sid, t, c in plan
    ]
    falloff = config.boundary_falloff_voxels

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(grid, mask, frame, falloff)) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        _init_worker(grid, mask, frame, falloff)
        results = [_run_one(job) for job in jobs]

    frame_info = frame.to_dict()
    entries = []
    for (sid, params, _), (paths, sizes, ratio) in zip(jobs, results):
        entries.append({
            "sample_id": sid,
            "input_image": str(config.input_image),
            "input_mask": str(config.input_mask),
            **params.to_dict(),
            "boundary_falloff_voxels": falloff,
            **frame_info,
            "measured_volume_ratio": ratio,
            "outputs": {k: p.relative_to(out_root).as_posix() for k, p in paths.items()},
            "bytes": sizes,
        })
        logger.debug("wrote %s", sid)

    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / MANIFEST_NAME).write_text(write_manifest(entries))
    logger.info("wrote %d samples to %s", len(entries), out_root)
    return entries
