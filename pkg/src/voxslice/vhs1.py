"""VHS1 container: a little-endian on-disk format for compressed volumes.

Layout: magic "VHS1"; u32 version=1; u32 nx,ny,nz; f32 sx,sy; nz f32 z
positions; 3 f32 origin; u32 palette count then per entry u16 id, u16 name
byte length, UTF-8 name, 3 u8 color; u8 has_labels; the BC1 color payload
(slices in z order); when labels are present, nz rasters of u16 ids, each
run-length encoded as (u32 run, u16 id) pairs ending with a zero-length run.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .codec import CompressedSlice
from .volume import ColorVolume, LabelVolume, PaletteEntry, VolumeMeta

MAGIC = b"VHS1"
VERSION = 1


class FormatError(ValueError):
    """Raised on malformed or unsupported container data."""


def _rle_encode(flat: np.ndarray) -> bytes:
    out = bytearray()
    n = len(flat)
    i = 0
    while i < n:
        j = i
        v = flat[i]
        while j < n and flat[j] == v:
            j += 1
        run = j - i
        while run > 0:
            chunk = min(run, 0xFFFFFFFF)
            out += struct.pack("<IH", chunk, int(v))
            run -= chunk
        i = j
    out += struct.pack("<IH", 0, 0)
    return bytes(out)


def _rle_decode(f: BinaryIO, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.uint16)
    pos = 0
    while True:
        hdr = f.read(6)
        if len(hdr) != 6:
            raise FormatError("truncated label run")
        run, value = struct.unpack("<IH", hdr)
        if run == 0:
            break
        if pos + run > count:
            raise FormatError("label runs overflow raster")
        out[pos:pos + run] = value
        pos += run
    if pos != count:
        raise FormatError("label runs underfill raster")
    return out


def write_vhs1(path, vol: ColorVolume, lab: LabelVolume | None = None) -> None:
    meta = vol.meta
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIII", VERSION, meta.nx, meta.ny, meta.nz))
        f.write(struct.pack("<ff", meta.sx, meta.sy))
        f.write(np.asarray(meta.z_table, dtype="<f4").tobytes())
        f.write(np.asarray(meta.origin, dtype="<f4").tobytes())
        f.write(struct.pack("<I", len(meta.palette)))
        for p in meta.palette:
            name = p.name.encode("utf-8")
            f.write(struct.pack("<HH", p.label_id, len(name)))
            f.write(name)
            f.write(bytes(p.color))
        f.write(struct.pack("<B", 1 if lab is not None else 0))
        for s in vol.slices:
            f.write(s.payload)
        if lab is not None:
            for k in range(meta.nz):
                f.write(_rle_encode(lab.voxels[k].reshape(-1)))


def read_vhs1(path) -> tuple[ColorVolume, LabelVolume | None]:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise FormatError("not a VHS1 file (bad magic)")
        version, nx, ny, nz = struct.unpack("<IIII", f.read(16))
        if version != VERSION:
            raise FormatError(f"unsupported VHS1 version {version}")
        sx, sy = struct.unpack("<ff", f.read(8))
        z_table = np.frombuffer(f.read(4 * nz), dtype="<f4").astype(np.float64)
        origin = np.frombuffer(f.read(12), dtype="<f4").astype(np.float64)
        (pcount,) = struct.unpack("<I", f.read(4))
        palette = []
        for _ in range(pcount):
            pid, nlen = struct.unpack("<HH", f.read(4))
            name = f.read(nlen).decode("utf-8")
            color = tuple(f.read(3))
            palette.append(PaletteEntry(pid, name, color))
        (has_labels,) = struct.unpack("<B", f.read(1))

        meta = VolumeMeta(nx, ny, nz, sx, sy, z_table=z_table,
                          origin=origin, palette=palette)
        per_slice = ((nx + 3) // 4) * ((ny + 3) // 4) * 8
        slices = []
        for _ in range(nz):
            payload = f.read(per_slice)
            if len(payload) != per_slice:
                raise FormatError("truncated color payload")
            slices.append(CompressedSlice(nx, ny, payload))
        vol = ColorVolume(meta, slices)

        lab = None
        if has_labels:
            grids = np.stack([_rle_decode(f, nx * ny).reshape(ny, nx)
                              for _ in range(nz)])
            lab = LabelVolume(meta, grids)
        return vol, lab
