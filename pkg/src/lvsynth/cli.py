"""Command line entry point: ``lvsynth <subcommand>``.

Exit codes: 0 success, 1 usage/config error, 2 I/O or parse error,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .calibration import calibrate_radial, volume_ratio
from .config import load_config
from .deform import DeformParams
from .errors import ConfigError, FormatError, LatticeMismatch, NumericError
from .frame import compute_frame
from .phantom import make_ellipsoid_phantom
from .sweep import IMAGE_NAME, MASK_NAME, SampleFailed, render_sample, run_sweep
from .volume import check_same_lattice
from .warp import endpoint_error

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _triple(text, cast=float):
    parts = text.split(",")
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected one or three comma-separated values, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit(record):
    sys.stdout.write(json.dumps(record) + "\n")


def cmd_generate(args):
    run_sweep(load_config(args.config), workers=args.workers)


def cmd_frame(args):
    frame = compute_frame(io.load_mask(args.mask))
    _emit(frame.to_dict())


def cmd_warp(args):
    grid = io.load_grid(args.image)
    mask = io.load_mask(args.mask)
    check_same_lattice(grid, mask)
    frame = compute_frame(mask)
    params = DeformParams(args.radial, args.longitudinal, args.torsion_deg, args.center)
    out = Path(args.out)
    paths, sizes, ratio = render_sample(grid, mask, frame, params, out, args.falloff)
    _emit({
        **params.to_dict(),
        "measured_volume_ratio": ratio,
        "outputs": {k: str(p) for k, p in paths.items()},
        "bytes": sizes,
    })


def cmd_calibrate(args):
    mask = io.load_mask(args.mask)
    frame = compute_frame(mask)
    r = calibrate_radial(args.target_ratio, args.longitudinal, mask, frame, args.tol, args.max_iter)
    measured = volume_ratio(mask, DeformParams(r, args.longitudinal, 0.0, 0.5), frame)
    _emit({
        "radial_ratio": r,
        "longitudinal_ratio": args.longitudinal,
        "target_volume_ratio": args.target_ratio,
        "measured_volume_ratio": measured,
    })


def cmd_phantom(args):
    grid, mask = make_ellipsoid_phantom(
        dims=args.dims,
        spacing=args.spacing,
        semi_axes=args.semi_axes,
        euler_orientation=args.euler,
        texture_period=args.texture_period,
    )
    out = Path(args.out)
    sizes = {"image": io.save(grid, out / IMAGE_NAME), "mask": io.save(mask, out / MASK_NAME)}
    _emit({"outputs": {"image": str(out / IMAGE_NAME), "mask": str(out / MASK_NAME)},
           "bytes": sizes, "mask_voxels": mask.count})


def cmd_epe(args):
    est = io.load_flow(args.est)
    gt = io.load_flow(args.gt)
    mask = io.load_mask(args.mask)
    mean, median = endpoint_error(est, gt, mask)
    _emit({"mean_epe_mm": mean, "median_epe_mm": median})


def build_parser():
    parser = _Parser(prog="lvsynth", description="Synthetic LV deformation data with GT flow.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="run a full torsion/center sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("frame", help="print the LV frame of a mask as JSON")
    p.add_argument("--mask", required=True)
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("warp", help="warp one image/mask pair")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--radial", type=float, required=True)
    p.add_argument("--longitudinal", type=float, required=True)
    p.add_argument("--torsion-deg", type=float, required=True)
    p.add_argument("--center", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--falloff", type=int, default=0)
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("calibrate", help="solve the radial ratio for a target volume ratio")
    p.add_argument("--mask", required=True)
    p.add_argument("--target-ratio", type=float, required=True)
    p.add_argument("--longitudinal", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=60)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("phantom", help="write a textured ellipsoid image/mask pair")
    p.add_argument("--out", required=True)
    p.add_argument("--dims", type=lambda s: _triple(s, int), default=(64, 64, 64))
    p.add_argument("--spacing", type=_triple, default=(1.0, 1.0, 1.0))
    p.add_argument("--semi-axes", type=_triple, default=(18.0, 18.0, 28.0))
    p.add_argument("--euler", type=_triple, default=(0.0, 0.0, 0.0),
                   help="extrinsic xyz rotation in radians")
    p.add_argument("--texture-period", type=float, default=20.0)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("epe", help="mean/median endpoint error of two flows over a mask")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--mask", required=True)
    p.set_defaults(func=cmd_epe)
    return parser


def _exit_code(exc):
    if isinstance(exc, SampleFailed):
        return _exit_code(exc.cause)
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, (FormatError, LatticeMismatch, OSError)):
        return EXIT_IO
    if isinstance(exc, (ConfigError, ValueError)):
        return EXIT_USAGE
    return None


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"lvsynth: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
