import struct

import numpy as np
import pytest

import voxslice as vx
from voxslice.vhs1 import FormatError, read_vhs1, write_vhs1


def test_round_trip(tmp_path, sphere_phantom):
    vol, lab = sphere_phantom
    path = tmp_path / "v.vhs1"
    write_vhs1(path, vol, lab)
    vol2, lab2 = read_vhs1(path)
    m, m2 = vol.meta, vol2.meta
    assert (m.nx, m.ny, m.nz) == (m2.nx, m2.ny, m2.nz)
    assert m2.sx == pytest.approx(m.sx) and m2.sy == pytest.approx(m.sy)
    assert np.allclose(m2.z_table, m.z_table)
    assert m2.palette == m.palette
    for a, b in zip(vol.slices, vol2.slices):
        assert a.payload == b.payload
    assert np.array_equal(lab.voxels, lab2.voxels)


def test_round_trip_without_labels(tmp_path, sphere_phantom):
    vol, _ = sphere_phantom
    path = tmp_path / "v.vhs1"
    write_vhs1(path, vol, None)
    _, lab2 = read_vhs1(path)
    assert lab2 is None


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(FormatError, match="magic"):
        read_vhs1(path)


def test_bad_version_rejected(tmp_path, sphere_phantom):
    vol, _ = sphere_phantom
    path = tmp_path / "v.vhs1"
    write_vhs1(path, vol, None)
    data = bytearray(path.read_bytes())
    data[4:8] = struct.pack("<I", 99)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="version"):
        read_vhs1(path)


def test_truncated_payload_rejected(tmp_path, sphere_phantom):
    vol, _ = sphere_phantom
    path = tmp_path / "v.vhs1"
    write_vhs1(path, vol, None)
    data = path.read_bytes()
    path.write_bytes(data[:-4])
    with pytest.raises(FormatError):
        read_vhs1(path)


def test_write_is_deterministic(tmp_path, sphere_phantom):
    vol, lab = sphere_phantom
    p1 = tmp_path / "a.vhs1"
    p2 = tmp_path / "b.vhs1"
    write_vhs1(p1, vol, lab)
    write_vhs1(p2, vol, lab)
    assert p1.read_bytes() == p2.read_bytes()


def test_label_rle_handles_long_runs(tmp_path):
    meta = vx.VolumeMeta(64, 64, 1, 1, 1, z_table=[0.0],
                         palette=[vx.PaletteEntry(1, "a", (1, 1, 1))])
    from voxslice.codec import CompressedSlice
    vol = vx.ColorVolume(meta, [CompressedSlice.encode(
        np.zeros((64, 64, 3), dtype=np.uint8))])
    grid = np.zeros((1, 64, 64), dtype=np.uint16)
    grid[0, 10:20, :] = 1
    lab = vx.LabelVolume(meta, grid)
    path = tmp_path / "r.vhs1"
    write_vhs1(path, vol, lab)
    _, lab2 = read_vhs1(path)
    assert np.array_equal(lab.voxels, lab2.voxels)
