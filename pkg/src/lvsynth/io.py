"""Binary readers and writers: a NIfTI-1 subset and the CVF1 flow container.

Supported NIfTI: single file (``n+1``), little-endian, 3D, uint8/int16/float32,
uncompressed. Orientation is ignored; the grid origin is the qform offset,
or the sform translation when only an sform is set.

CVF1 layout (little-endian)::

    b"CVF1" | u32 nx, ny, nz | f32 sx, sy, sz | f32 ox, oy, oz |
    f32[3 * nx * ny * nz] interleaved (dx, dy, dz), x fastest
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import (
    MalformedHeader,
    NonBinaryMask,
    NonFiniteData,
    ResourceError,
    TruncatedData,
    UnsupportedFeature,
)
from .volume import FlowField3, Mask3, VoxelGrid3

HEADER_SIZE = 348
VOX_OFFSET = 352

# NIfTI-1 header layout, little-endian.
HEADER_DTYPE = np.dtype([
    ("sizeof_hdr", "<i4"),
    ("data_type", "S10"),
    ("db_name", "S18"),
    ("extents", "<i4"),
    ("session_error", "<i2"),
    ("regular", "S1"),
    ("dim_info", "u1"),
    ("dim", "<i2", (8,)),
    ("intent_p1", "<f4"),
    ("intent_p2", "<f4"),
    ("intent_p3", "<f4"),
    ("intent_code", "<i2"),
    ("datatype", "<i2"),
    ("bitpix", "<i2"),
    ("slice_start", "<i2"),
    ("pixdim", "<f4", (8,)),
    ("vox_offset", "<f4"),
    ("scl_slope", "<f4"),
    ("scl_inter", "<f4"),
    ("slice_end", "<i2"),
    ("slice_code", "u1"),
    ("xyzt_units", "u1"),
    ("cal_max", "<f4"),
    ("cal_min", "<f4"),
    ("slice_duration", "<f4"),
    ("toffset", "<f4"),
    ("glmax", "<i4"),
    ("glmin", "<i4"),
    ("descrip", "S80"),
    ("aux_file", "S24"),
    ("qform_code", "<i2"),
    ("sform_code", "<i2"),
    ("quatern_b", "<f4"),
    ("quatern_c", "<f4"),
    ("quatern_d", "<f4"),
    ("qoffset_x", "<f4"),
    ("qoffset_y", "<f4"),
    ("qoffset_z", "<f4"),
    ("srow_x", "<f4", (4,)),
    ("srow_y", "<f4", (4,)),
    ("srow_z", "<f4", (4,)),
    ("intent_name", "S16"),
    ("magic", "S4"),
])
assert HEADER_DTYPE.itemsize == HEADER_SIZE

# NIfTI datatype code -> (numpy dtype, bitpix)
DATATYPES = {
    2: (np.dtype("u1"), 8),
    4: (np.dtype("<i2"), 16),
    16: (np.dtype("<f4"), 32),
}

_NIFTI_XFORM_SCANNER_ANAT = 1
_UNITS_MM = 2


def read_nifti(buf, as_mask=False):
    """Parse a NIfTI-1 byte string into a :class:`VoxelGrid3`.

    With ``as_mask=True`` the volume is returned as a :class:`Mask3`; every
    voxel must then be exactly 0 or 1 (after intensity scaling).
    """
    buf = memoryview(buf).cast("B")
    if len(buf) >= 2 and bytes(buf[:2]) == b"\x1f\x8b":
        raise UnsupportedFeature("gzip-compressed NIfTI is not supported")
    if len(buf) < HEADER_SIZE:
        raise TruncatedData(f"header needs {HEADER_SIZE} bytes, got {len(buf)}")

    (size_le,) = struct.unpack_from("<i", buf, 0)
    if size_le != HEADER_SIZE:
        (size_be,) = struct.unpack_from(">i", buf, 0)
        if size_be == HEADER_SIZE:
            raise UnsupportedFeature("big-endian NIfTI is not supported")
        raise MalformedHeader(f"sizeof_hdr is {size_le}, expected {HEADER_SIZE}")
    hdr = np.frombuffer(buf, dtype=HEADER_DTYPE, count=1)[0]

    magic = bytes(buf[344:348])
    if magic == b"ni1\x00":
        raise UnsupportedFeature("two-file (.hdr/.img) NIfTI is not supported")
    if magic != b"n+1\x00":
        raise MalformedHeader(f"bad magic {magic!r}")

    dim = [int(d) for d in hdr["dim"]]
    if dim[0] != 3:
        raise UnsupportedFeature(f"only 3D volumes are supported (dim[0]={dim[0]})")
    dims = tuple(dim[1:4])
    if min(dims) < 1:
        raise MalformedHeader(f"non-positive dimensions {dims}")

    code = int(hdr["datatype"])
    if code not in DATATYPES:
        raise UnsupportedFeature(f"datatype {code} is not supported")
    dtype, _ = DATATYPES[code]

    spacing = tuple(float(p) for p in hdr["pixdim"][1:4])
    if not all(np.isfinite(s) and s > 0 for s in spacing):
        raise MalformedHeader(f"invalid pixdim {spacing}")

    if int(hdr["qform_code"]) > 0:
        origin = (float(hdr["qoffset_x"]), float(hdr["qoffset_y"]), float(hdr["qoffset_z"]))
    elif int(hdr["sform_code"]) > 0:
        # translation column only; rotation/shear is ignored like the quaternion
        origin = (float(hdr["srow_x"][3]), float(hdr["srow_y"][3]), float(hdr["srow_z"][3]))
    else:
        origin = (0.0, 0.0, 0.0)
    if not all(np.isfinite(o) for o in origin):
        raise MalformedHeader(f"invalid origin {origin}")

    vox_offset = float(hdr["vox_offset"])
    if not np.isfinite(vox_offset) or vox_offset < HEADER_SIZE or vox_offset != int(vox_offset):
        raise MalformedHeader(f"invalid vox_offset {vox_offset}")
    start = int(vox_offset)
    nvox = dims[0] * dims[1] * dims[2]
    stop = start + nvox * dtype.itemsize
    if len(buf) < stop:
        raise TruncatedData(f"payload needs {stop} bytes, got {len(buf)}")

    raw = np.frombuffer(buf[start:stop], dtype=dtype).reshape(dims, order="F")

    slope = float(hdr["scl_slope"])
    inter = float(hdr["scl_inter"])
    if not np.isfinite(inter):
        inter = 0.0
    # slope 0 means "unscaled"; slope 1 / inter 0 is skipped to keep -0.0 bit-exact
    if np.isfinite(slope) and slope != 0 and not (slope == 1 and inter == 0):
        values = raw.astype(np.float64) * slope + inter
    else:
        values = raw
    if as_mask:
        if not np.all((values == 0) | (values == 1)):
            raise NonBinaryMask("mask voxels must be 0 or 1")
        return Mask3(values == 1, spacing, origin)
    values = values.astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise NonFiniteData("volume contains NaN or Inf")
    return VoxelGrid3(values, spacing, origin)


def write_nifti(vol):
    """Serialize a grid (float32) or mask (uint8) to single-file NIfTI-1 bytes."""
    if isinstance(vol, Mask3):
        code, payload = 2, vol.data.astype(np.uint8)
    elif isinstance(vol, VoxelGrid3):
        code, payload = 16, vol.data.astype("<f4")
    else:
        raise TypeError(f"cannot write {type(vol).__name__} as NIfTI")
    _, bitpix = DATATYPES[code]
    sx, sy, sz = vol.spacing
    ox, oy, oz = vol.origin

    hdr = np.zeros((), dtype=HEADER_DTYPE)
    hdr["sizeof_hdr"] = HEADER_SIZE
    hdr["regular"] = b"r"
    hdr["dim"] = [3, *vol.dims, 1, 1, 1, 1]
    hdr["datatype"] = code
    hdr["bitpix"] = bitpix
    hdr["pixdim"] = [1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0]
    hdr["vox_offset"] = VOX_OFFSET
    hdr["scl_slope"] = 1.0
    hdr["scl_inter"] = 0.0
    hdr["xyzt_units"] = _UNITS_MM
    hdr["qform_code"] = _NIFTI_XFORM_SCANNER_ANAT
    hdr["sform_code"] = _NIFTI_XFORM_SCANNER_ANAT
    hdr["qoffset_x"], hdr["qoffset_y"], hdr["qoffset_z"] = ox, oy, oz
    hdr["srow_x"] = [sx, 0.0, 0.0, ox]
    hdr["srow_y"] = [0.0, sy, 0.0, oy]
    hdr["srow_z"] = [0.0, 0.0, sz, oz]
    hdr["magic"] = b"n+1\x00"

    try:
        return b"".join([
            hdr.tobytes(),
            b"\x00" * (VOX_OFFSET - HEADER_SIZE),
            payload.tobytes(order="F"),
        ])
    except MemoryError as exc:
        raise ResourceError("out of memory serializing volume") from exc


_CVF_MAGIC = b"CVF1"
_CVF_HEAD = struct.Struct("<4s3I3f3f")


def write_flow(flow):
    """Serialize a :class:`FlowField3` to CVF1 bytes."""
    head = _CVF_HEAD.pack(_CVF_MAGIC, *flow.dims, *flow.spacing, *flow.origin)
    # (nx, ny, nz, 3) in Fortran order over the lattice axes, components innermost
    body = np.ascontiguousarray(flow.data.astype("<f4").transpose(2, 1, 0, 3))
    try:
        return head + body.tobytes()
    except MemoryError as exc:
        raise ResourceError("out of memory serializing flow") from exc


def read_flow(buf):
    """Parse CVF1 bytes into a :class:`FlowField3`."""
    buf = memoryview(buf).cast("B")
    if len(buf) < 4:
        raise TruncatedData("missing CVF1 magic")
    if bytes(buf[:4]) != _CVF_MAGIC:
        raise MalformedHeader(f"bad magic {bytes(buf[:4])!r}")
    if len(buf) < _CVF_HEAD.size:
        raise TruncatedData(f"header needs {_CVF_HEAD.size} bytes, got {len(buf)}")
    _, nx, ny, nz, sx, sy, sz, ox, oy, oz = _CVF_HEAD.unpack_from(buf, 0)
    if min(nx, ny, nz) < 1:
        raise MalformedHeader(f"non-positive dimensions {(nx, ny, nz)}")
    spacing = (sx, sy, sz)
    if not all(np.isfinite(s) and s > 0 for s in spacing):
        raise MalformedHeader(f"invalid spacing {spacing}")
    origin = (ox, oy, oz)
    if not all(np.isfinite(o) for o in origin):
        raise MalformedHeader(f"invalid origin {origin}")
    stop = _CVF_HEAD.size + 12 * nx * ny * nz
    if len(buf) < stop:
        raise TruncatedData(f"payload needs {stop} bytes, got {len(buf)}")
    data = np.frombuffer(buf[_CVF_HEAD.size:stop], dtype="<f4").reshape(nz, ny, nx, 3)
    if not np.all(np.isfinite(data)):
        raise NonFiniteData("flow contains NaN or Inf")
    return FlowField3(data.transpose(2, 1, 0, 3), spacing, origin)


# -- path helpers -----------------------------------------------------------

def load_grid(path):
    return read_nifti(Path(path).read_bytes())


def load_mask(path):
    return read_nifti(Path(path).read_bytes(), as_mask=True)


def load_flow(path):
    return read_flow(Path(path).read_bytes())


def save(vol, path):
    """Write a grid, mask or flow to ``path``; returns the byte count."""
    payload = write_flow(vol) if isinstance(vol, FlowField3) else write_nifti(vol)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return len(payload)
