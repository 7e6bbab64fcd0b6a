"""Procedural labeled test volumes: ellipsoid "organs" over a background.

Ellipsoids are painted in list order, so later entries win on overlap. An
optional linear gradient field replaces the flat colors for interpolation
tests, where an analytic ground truth is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .volume import DomainError, LabelVolume, PaletteEntry, VolumeMeta


@dataclass
class Ellipsoid:
    center: tuple[float, float, float]   # mm
    semi_axes: tuple[float, float, float]
    label_id: int
    name: str
    color: tuple[int, int, int]

    def __post_init__(self):
        if min(self.semi_axes) <= 0:
            raise DomainError("ellipsoid semi-axes must be positive")


@dataclass
class GradientField:
    """color(q) = coeff_x*q.x + coeff_y*q.y + coeff_z*q.z + offset, per channel."""
    coeff_x: tuple[float, float, float] = (0, 0, 0)
    coeff_y: tuple[float, float, float] = (0, 0, 0)
    coeff_z: tuple[float, float, float] = (0, 0, 0)
    offset: tuple[float, float, float] = (0, 0, 0)


@dataclass
class PhantomSpec:
    nx: int
    ny: int
    nz: int
    sx: float = 1.0
    sy: float = 1.0
    z_table: np.ndarray | None = None    # defaults to 1 mm uniform
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ellipsoids: list[Ellipsoid] = field(default_factory=list)
    background: tuple[int, int, int] = (20, 20, 20)
    gradient: GradientField | None = None
    seed: int = 0

    def meta(self) -> VolumeMeta:
        zt = self.z_table
        if zt is None:
            zt = np.arange(self.nz, dtype=np.float64)
        palette = [PaletteEntry(e.label_id, e.name, e.color)
                   for e in self.ellipsoids]
        # dedupe repeated ids, keeping the first occurrence's name/color
        seen, uniq = set(), []
        for p in palette:
            if p.label_id not in seen:
                seen.add(p.label_id)
                uniq.append(p)
        return VolumeMeta(self.nx, self.ny, self.nz, self.sx, self.sy,
                          z_table=zt, origin=np.asarray(self.origin),
                          palette=uniq)


def generate_phantom(spec: PhantomSpec) -> tuple[np.ndarray, LabelVolume]:
    """Rasterize a spec into (raw color stack (nz,ny,nx,3) uint8, labels).

    Deterministic for a given spec and seed; the seed perturbs nothing today
    but is kept in the fixture contract for future noise fields.
    """
    if spec.nx < 1 or spec.ny < 1 or spec.nz < 1:
        raise DomainError("phantom dims must be >= 1")
    meta = spec.meta()

    xs = meta.origin[0] + np.arange(spec.nx) * spec.sx
    ys = meta.origin[1] + np.arange(spec.ny) * spec.sy
    zs = meta.z_table
    X = xs[None, None, :]
    Y = ys[None, :, None]
    Z = zs[:, None, None]

    colors = np.empty((spec.nz, spec.ny, spec.nx, 3), dtype=np.uint8)
    if spec.gradient is not None:
        g = spec.gradient
        for ch in range(3):
            v = (g.coeff_x[ch] * X + g.coeff_y[ch] * Y + g.coeff_z[ch] * Z
                 + g.offset[ch])
            colors[..., ch] = np.clip(np.round(v), 0, 255).astype(np.uint8)
    else:
        colors[:] = np.asarray(spec.background, dtype=np.uint8)

    labels = np.zeros((spec.nz, spec.ny, spec.nx), dtype=np.uint16)
    for e in spec.ellipsoids:          # painter's order: later wins
        cx, cy, cz = e.center
        ax, ay, az = e.semi_axes
        inside = (((X - cx) / ax) ** 2 + ((Y - cy) / ay) ** 2
                  + ((Z - cz) / az) ** 2) <= 1.0
        labels[inside] = e.label_id
        if spec.gradient is None:
            colors[inside] = np.asarray(e.color, dtype=np.uint8)

    return colors, LabelVolume(meta, labels)
