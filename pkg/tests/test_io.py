import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lvsynth import errors
from lvsynth.io import HEADER_SIZE, read_flow, read_nifti, write_flow, write_nifti
from lvsynth.volume import FlowField3, Mask3, VoxelGrid3

nib = pytest.importorskip("nibabel")


def nib_bytes(data, spacing=(1.0, 1.0, 1.0), slope=None, inter=None, origin=(0.0, 0.0, 0.0)):
    affine = np.diag([*spacing, 1.0])
    affine[:3, 3] = origin
    img = nib.Nifti1Image(data, affine)
    if slope is not None:
        img.header.set_slope_inter(slope, inter)
    return img.to_bytes()


def patch_i2(buf, offset, value):
    buf = bytearray(buf)
    struct.pack_into("<h", buf, offset, value)
    return bytes(buf)


# -- read_nifti ------------------------------------------------------------

def test_minimal_float32():
    data = np.arange(64, dtype=np.float32).reshape(4, 4, 4)
    grid = read_nifti(nib_bytes(data))
    assert grid.dims == (4, 4, 4)
    assert grid.spacing == (1.0, 1.0, 1.0)
    assert grid.data.size == 64 and np.all(np.isfinite(grid.data))
    np.testing.assert_array_equal(grid.data, data)


def test_int16_scaling():
    # hand formula: 5 * 2.0 + 1.0
    data = np.full((2, 2, 2), 5, dtype=np.int16)
    grid = read_nifti(nib_bytes(data, slope=2.0, inter=1.0))
    assert np.all(grid.data == 11.0)


def test_spacing_and_origin_from_header():
    data = np.zeros((3, 4, 5), dtype=np.uint8)
    grid = read_nifti(nib_bytes(data, spacing=(0.5, 0.75, 2.0), origin=(-10.0, 3.0, 7.5)))
    assert grid.dims == (3, 4, 5)
    assert grid.spacing == (0.5, 0.75, 2.0)
    assert grid.origin == (-10.0, 3.0, 7.5)


def test_x_fastest_order():
    data = np.zeros((3, 2, 2), dtype=np.float32)
    data[2, 0, 0] = 7.0
    raw = nib_bytes(data)
    # third float of the payload is voxel (2, 0, 0)
    (v,) = struct.unpack_from("<f", raw, 352 + 8)
    assert v == 7.0
    assert read_nifti(raw).data[2, 0, 0] == 7.0


def test_two_file_magic_unsupported():
    raw = bytearray(nib_bytes(np.zeros((4, 4, 4), np.float32)))
    raw[344:348] = b"ni1\x00"
    with pytest.raises(errors.UnsupportedFeature):
        read_nifti(bytes(raw))


def test_bad_magic_malformed():
    raw = bytearray(nib_bytes(np.zeros((4, 4, 4), np.float32)))
    raw[344:348] = b"abcd"
    with pytest.raises(errors.MalformedHeader):
        read_nifti(bytes(raw))


def test_wrong_header_size_malformed():
    raw = bytearray(nib_bytes(np.zeros((4, 4, 4), np.float32)))
    struct.pack_into("<i", raw, 0, 540)
    with pytest.raises(errors.MalformedHeader):
        read_nifti(bytes(raw))


def test_big_endian_unsupported():
    img = nib.Nifti1Image(np.zeros((4, 4, 4), np.float32), np.eye(4))
    hdr = img.header.as_byteswapped(">")
    raw = nib.Nifti1Image(img.dataobj, np.eye(4), header=hdr).to_bytes()
    assert raw[:4] == struct.pack(">i", 348)
    with pytest.raises(errors.UnsupportedFeature):
        read_nifti(raw)


@pytest.mark.parametrize("dtype", [np.float64, np.int32, np.uint16])
def test_unsupported_datatype(dtype):
    with pytest.raises(errors.UnsupportedFeature):
        read_nifti(nib_bytes(np.zeros((4, 4, 4), dtype)))


def test_4d_unsupported():
    with pytest.raises(errors.UnsupportedFeature):
        read_nifti(nib_bytes(np.zeros((4, 4, 4, 2), np.float32)))


def test_gzip_unsupported():
    import gzip
    with pytest.raises(errors.UnsupportedFeature):
        read_nifti(gzip.compress(nib_bytes(np.zeros((4, 4, 4), np.float32))))


def test_truncated_payload():
    raw = nib_bytes(np.zeros((4, 4, 4), np.float32))
    with pytest.raises(errors.TruncatedData):
        read_nifti(raw[:-1])


def test_nonfinite_rejected():
    data = np.zeros((4, 4, 4), np.float32)
    data[1, 2, 3] = np.nan
    with pytest.raises(errors.NonFiniteData):
        read_nifti(nib_bytes(data))


def test_mask_reinterpretation():
    data = np.zeros((4, 4, 4), np.uint8)
    data[1, 1, 1] = 1
    mask = read_nifti(nib_bytes(data), as_mask=True)
    assert isinstance(mask, Mask3) and mask.count == 1 and mask.data[1, 1, 1]
    data[0, 0, 0] = 2
    with pytest.raises(errors.NonBinaryMask):
        read_nifti(nib_bytes(data), as_mask=True)


def test_trailing_bytes_ignored():
    data = np.ones((4, 4, 4), np.float32)
    grid = read_nifti(nib_bytes(data) + b"\xff" * 13)
    np.testing.assert_array_equal(grid.data, data)


# -- write_nifti -----------------------------------------------------------

def test_mask_payload_size():
    data = np.zeros((8, 8, 8), bool)
    data[2:5, 2:5, 2:5] = True
    raw = write_nifti(Mask3(data))
    assert len(raw) == 348 + 4 + 512
    assert struct.unpack_from("<f", raw, 108)[0] == 352.0


def test_pixdim_copied():
    raw = write_nifti(VoxelGrid3(np.zeros((4, 4, 4)), spacing=(0.5, 0.5, 2.0)))
    assert struct.unpack_from("<8f", raw, 76)[1:4] == (0.5, 0.5, 2.0)


def test_written_file_readable_by_nibabel(rng):
    data = rng.normal(size=(5, 6, 7)).astype(np.float32)
    grid = VoxelGrid3(data, spacing=(0.7, 0.8, 2.5), origin=(-3.0, 4.0, 12.25))
    img = nib.Nifti1Image.from_bytes(write_nifti(grid))
    np.testing.assert_array_equal(np.asarray(img.dataobj), data)
    np.testing.assert_allclose(img.header.get_zooms(), grid.spacing)
    np.testing.assert_allclose(img.affine[:3, 3], grid.origin)
    assert img.header["magic"] == b"n+1"


def test_mask_written_as_uint8():
    raw = write_nifti(Mask3(np.ones((4, 4, 4), bool)))
    assert struct.unpack_from("<h", raw, 70)[0] == 2


# -- flow ------------------------------------------------------------------

def test_zero_flow_size():
    raw = write_flow(FlowField3(np.zeros((2, 2, 2, 3))))
    assert len(raw) == 4 + 12 + 12 + 12 + 96 == 136
    assert raw[:4] == b"CVF1"


def test_flow_layout_components_interleaved_x_fastest():
    data = np.zeros((2, 1, 1, 3), np.float32)
    data[1, 0, 0] = (1.0, 2.0, 3.0)
    raw = write_flow(FlowField3(data, spacing=(0.5, 1.0, 2.0), origin=(1.0, 2.0, 3.0)))
    assert struct.unpack_from("<3I3f3f", raw, 4) == (2, 1, 1, 0.5, 1.0, 2.0, 1.0, 2.0, 3.0)
    assert struct.unpack_from("<6f", raw, 40) == (0.0, 0.0, 0.0, 1.0, 2.0, 3.0)


def test_flow_bad_magic():
    raw = bytearray(write_flow(FlowField3(np.zeros((2, 2, 2, 3)))))
    raw[:4] = b"CVF2"
    with pytest.raises(errors.MalformedHeader):
        read_flow(bytes(raw))


def test_flow_nonfinite():
    raw = bytearray(write_flow(FlowField3(np.zeros((2, 2, 2, 3)))))
    struct.pack_into("<f", raw, 40, float("inf"))
    with pytest.raises(errors.NonFiniteData):
        read_flow(bytes(raw))


def test_flow_zero_dim_malformed():
    raw = bytearray(write_flow(FlowField3(np.zeros((2, 2, 2, 3)))))
    struct.pack_into("<I", raw, 4, 0)
    with pytest.raises(errors.MalformedHeader):
        read_flow(bytes(raw))


# -- properties ------------------------------------------------------------

dims_st = st.tuples(*[st.integers(1, 6)] * 3)
spacing_st = st.tuples(*[st.floats(0.0625, 10.0, width=32)] * 3)
origin_st = st.tuples(*[st.floats(-500, 500, width=32)] * 3)
finite32 = st.floats(-1e6, 1e6, width=32, allow_nan=False)


@st.composite
def grids(draw):
    dims = draw(dims_st)
    data = draw(hnp.arrays(np.float32, dims, elements=finite32))
    return VoxelGrid3(data, draw(spacing_st), draw(origin_st))


@st.composite
def masks(draw):
    dims = draw(dims_st)
    return Mask3(draw(hnp.arrays(bool, dims)), draw(spacing_st), draw(origin_st))


@st.composite
def flows(draw):
    dims = draw(dims_st)
    data = draw(hnp.arrays(np.float32, dims + (3,), elements=finite32))
    return FlowField3(data, draw(spacing_st), draw(origin_st))


def _bits_equal(a, b):
    return a.same_lattice(b) and a.data.tobytes() == b.data.tobytes()


@settings(max_examples=60, deadline=None)
@given(grids())
def test_grid_roundtrip(g):
    assert _bits_equal(read_nifti(write_nifti(g)), g)


@settings(max_examples=60, deadline=None)
@given(masks())
def test_mask_roundtrip(m):
    assert _bits_equal(read_nifti(write_nifti(m), as_mask=True), m)


@settings(max_examples=60, deadline=None)
@given(flows())
def test_flow_roundtrip(f):
    assert _bits_equal(read_flow(write_flow(f)), f)


@settings(max_examples=40, deadline=None)
@given(grids(), st.data())
def test_nifti_truncation_always_errors(g, data):
    raw = write_nifti(g)
    cut = data.draw(st.integers(0, len(raw) - 1))
    with pytest.raises(errors.FormatError):
        read_nifti(raw[:cut])


@settings(max_examples=40, deadline=None)
@given(flows(), st.data())
def test_flow_truncation_always_errors(f, data):
    raw = write_flow(f)
    cut = data.draw(st.integers(0, len(raw) - 1))
    with pytest.raises(errors.FormatError):
        read_flow(raw[:cut])


def test_containers_are_immutable():
    g = VoxelGrid3(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        g.data[0, 0, 0] = 1
    with pytest.raises(AttributeError):
        g.spacing = (2, 2, 2)


def test_header_size_constant():
    assert HEADER_SIZE == 348


def test_containers_pickle():
    import pickle
    for vol in (VoxelGrid3(np.arange(8.0).reshape(2, 2, 2), spacing=(0.5, 1, 2)),
                Mask3(np.eye(2, dtype=bool)[:, :, None].repeat(2, 2)),
                FlowField3(np.ones((2, 1, 1, 3)), origin=(1, 2, 3))):
        assert pickle.loads(pickle.dumps(vol)) == vol
