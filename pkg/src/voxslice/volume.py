"""Volume data model: metadata, coordinate mapping, and sampling.

Colors live in block-compressed per-slice rasters (see codec); labels are a
dense uint16 grid. Voxel values are node samples at voxel centers, so the
interpolation hull is [0, n-1] in index space along each axis. The z axis
uses an explicit position table to support non-uniform slice spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when an operation's preconditions are violated."""


@dataclass(frozen=True)
class PaletteEntry:
    label_id: int
    name: str
    color: tuple[int, int, int]


@dataclass
class VolumeMeta:
    nx: int
    ny: int
    nz: int
    sx: float
    sy: float
    z_table: np.ndarray          # (nz,) strictly increasing, mm
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    palette: list[PaletteEntry] = field(default_factory=list)

    def __post_init__(self):
        self.z_table = np.asarray(self.z_table, dtype=np.float64)
        self.origin = np.asarray(self.origin, dtype=np.float64)
        if self.nx < 1 or self.ny < 1 or self.nz < 1:
            raise DomainError("voxel counts must be >= 1")
        if self.sx <= 0 or self.sy <= 0:
            raise DomainError("in-plane spacing must be positive")
        if self.z_table.shape != (self.nz,):
            raise DomainError("z_table length must equal nz")
        if self.nz > 1 and not np.all(np.diff(self.z_table) > 0):
            raise DomainError("z_table must be strictly increasing")
        ids = [p.label_id for p in self.palette]
        if len(ids) != len(set(ids)):
            raise DomainError("palette label ids must be unique")
        if 0 in ids:
            raise DomainError("label id 0 is reserved for background")

    def palette_by_id(self) -> dict[int, PaletteEntry]:
        return {p.label_id: p for p in self.palette}

    def volume_center(self) -> np.ndarray:
        """World center of the voxel-center bounding box."""
        cx = self.origin[0] + (self.nx - 1) * self.sx / 2.0
        cy = self.origin[1] + (self.ny - 1) * self.sy / 2.0
        cz = (self.z_table[0] + self.z_table[-1]) / 2.0
        return np.array([cx, cy, cz])


def voxel_to_world(meta: VolumeMeta, i: int, j: int, k: int) -> np.ndarray:
    if not (0 <= i < meta.nx and 0 <= j < meta.ny and 0 <= k < meta.nz):
        raise DomainError(f"voxel index ({i},{j},{k}) out of range")
    return np.array([meta.origin[0] + i * meta.sx,
                     meta.origin[1] + j * meta.sy,
                     meta.z_table[k]])


def continuous_z_index(meta: VolumeMeta, z):
    """Fractional slice index for world z, vectorized.

    Inside the table: k + linear fraction within [z_k, z_k+1]. Outside:
    linear extrapolation of the nearest interval. A single-slice volume has
    no interval; a 1 mm fallback spacing keeps the function total.
    """
    z = np.asarray(z, dtype=np.float64)
    zt = meta.z_table
    if meta.nz == 1:
        return z - zt[0]
    k = np.clip(np.searchsorted(zt, z, side="right") - 1, 0, meta.nz - 2)
    return k + (z - zt[k]) / (zt[k + 1] - zt[k])


def world_to_continuous_index(meta: VolumeMeta, p) -> np.ndarray:
    """Inverse of voxel_to_world, total over all world points."""
    p = np.asarray(p, dtype=np.float64)
    fx = (p[..., 0] - meta.origin[0]) / meta.sx
    fy = (p[..., 1] - meta.origin[1]) / meta.sy
    fz = continuous_z_index(meta, p[..., 2])
    return np.stack([fx, fy, fz], axis=-1)


def trilinear_sample_slices(meta: VolumeMeta, fetch_slice, points,
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Trilinear interpolation over per-slice rasters.

    ``fetch_slice(k)`` returns slice k as (ny, nx, 3); interpolation blends
    the 8 surrounding node values with separable linear weights, so any
    volume whose node values are an affine function of (i, j, k) is
    reproduced exactly inside the hull. Returns (colors (N, 3) float64,
    inside (N,) bool); outside points get zeros.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    f = world_to_continuous_index(meta, points)
    n = np.array([meta.nx, meta.ny, meta.nz])
    inside = np.all((f >= 0.0) & (f <= n - 1), axis=-1)

    i0 = np.clip(np.floor(f).astype(np.int64), 0, np.maximum(n - 1, 0))
    i1 = np.minimum(i0 + 1, n - 1)
    t = f - i0
    # outside points still flow through with clamped indices; masked later
    t = np.where(inside[:, None], t, 0.0)

    x0, y0, z0 = i0[:, 0], i0[:, 1], i0[:, 2]
    x1, y1, z1 = i1[:, 0], i1[:, 1], i1[:, 2]
    tx, ty, tz = t[:, 0:1], t[:, 1:2], t[:, 2:3]

    ks = np.unique(np.concatenate([z0, z1]))
    stack = np.stack([np.asarray(fetch_slice(int(k)), dtype=np.float64)
                      for k in ks])
    kz0 = np.searchsorted(ks, z0)
    kz1 = np.searchsorted(ks, z1)

    c000 = stack[kz0, y0, x0]
    c100 = stack[kz0, y0, x1]
    c010 = stack[kz0, y1, x0]
    c110 = stack[kz0, y1, x1]
    c001 = stack[kz1, y0, x0]
    c101 = stack[kz1, y0, x1]
    c011 = stack[kz1, y1, x0]
    c111 = stack[kz1, y1, x1]

    c00 = c000 * (1 - tx) + c100 * tx
    c10 = c010 * (1 - tx) + c110 * tx
    c01 = c001 * (1 - tx) + c101 * tx
    c11 = c011 * (1 - tx) + c111 * tx
    c0 = c00 * (1 - ty) + c10 * ty
    c1 = c01 * (1 - ty) + c11 * ty
    out = c0 * (1 - tz) + c1 * tz
    out[~inside] = 0.0
    return out, inside


class ColorVolume:
    """Stack of BC1-compressed color slices with random-access sampling.

    Immutable after construction; the decoded-slice cache is append-only so
    concurrent readers are safe under the GIL.
    """

    def __init__(self, meta: VolumeMeta, slices):
        from .codec import CompressedSlice
        if len(slices) != meta.nz:
            raise DomainError("slice count must equal nz")
        for s in slices:
            if not isinstance(s, CompressedSlice):
                raise DomainError("slices must be CompressedSlice")
            if s.width != meta.nx or s.height != meta.ny:
                raise DomainError("slice dims must match meta")
        self.meta = meta
        self.slices = list(slices)
        self._decoded: dict[int, np.ndarray] = {}

    def decoded_slice(self, k: int) -> np.ndarray:
        """Full decode of slice k as (ny, nx, 3) uint8, cached."""
        arr = self._decoded.get(k)
        if arr is None:
            arr = self.slices[k].decode()
            arr.setflags(write=False)
            self._decoded[k] = arr
        return arr

    def sample_trilinear_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Trilinear color at each world point.

        Returns (colors (N,3) float64 in 0..255, inside (N,) bool). Colors on
        outside points are zero.
        """
        return trilinear_sample_slices(self.meta, self.decoded_slice, points)


def sample_trilinear(vol: ColorVolume, p):
    """Trilinear color at one world point, or None when outside the hull."""
    colors, inside = vol.sample_trilinear_many(np.asarray(p)[None, :])
    if not inside[0]:
        return None
    return colors[0]


class LabelVolume:
    """Dense per-voxel anatomical label ids, nearest-neighbor sampled."""

    def __init__(self, meta: VolumeMeta, voxels: np.ndarray):
        voxels = np.asarray(voxels, dtype=np.uint16)
        if voxels.shape != (meta.nz, meta.ny, meta.nx):
            raise DomainError("label grid must be (nz, ny, nx)")
        known = {p.label_id for p in meta.palette} | {0}
        present = set(np.unique(voxels).tolist())
        if not present <= known:
            raise DomainError(f"labels not in palette: {sorted(present - known)}")
        self.meta = meta
        self.voxels = voxels
        self.voxels.setflags(write=False)

    def sample_nearest_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Nearest label at each world point: (labels (N,), inside (N,))."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        f = world_to_continuous_index(self.meta, points)
        n = np.array([self.meta.nx, self.meta.ny, self.meta.nz])
        inside = np.all((f >= 0.0) & (f <= n - 1), axis=-1)
        idx = np.floor(f + 0.5).astype(np.int64)      # ties round half up
        idx = np.clip(idx, 0, n - 1)
        labels = self.voxels[idx[:, 2], idx[:, 1], idx[:, 0]]
        labels = np.where(inside, labels, 0).astype(np.uint16)
        return labels, inside


def sample_label_nearest(lab: LabelVolume, p):
    """Label at one world point, or None when outside the hull."""
    labels, inside = lab.sample_nearest_many(np.asarray(p)[None, :])
    if not inside[0]:
        return None
    return int(labels[0])
