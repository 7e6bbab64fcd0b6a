"""Plane and box-face slice extraction plus dynamic resolution control.

Pixel centers sample at +0.5 offsets so the center of an odd-resolution
image lands exactly on the plane center. Image row 0 is the +v edge (raster
top), so b is negated relative to the v axis.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .volume import ColorVolume, DomainError, LabelVolume

_ORTHO_TOL = 1e-9


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5)


def scaled_dim(d: int, s: float) -> int:
    return max(1, int(math.floor(d * s + 0.5)))


@dataclass
class PlaneSlicer:
    center: np.ndarray
    u: np.ndarray
    v: np.ndarray
    hu: float
    hv: float
    width: int = 256
    height: int = 256

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if abs(np.linalg.norm(self.u) - 1) > _ORTHO_TOL:
            raise DomainError("u must be unit length")
        if abs(np.linalg.norm(self.v) - 1) > _ORTHO_TOL:
            raise DomainError("v must be unit length")
        if abs(float(self.u @ self.v)) > _ORTHO_TOL:
            raise DomainError("u and v must be orthogonal")
        if self.hu <= 0 or self.hv <= 0:
            raise DomainError("half-extents must be positive")
        if self.width < 1 or self.height < 1:
            raise DomainError("resolution must be >= 1")

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.u, self.v)


@dataclass
class BoxSlicer:
    center: np.ndarray
    basis: np.ndarray            # rows r0, r1, r2, orthonormal
    extents: np.ndarray          # half-extents e0, e1, e2
    face_res: int = 256

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        self.basis = np.asarray(self.basis, dtype=np.float64).reshape(3, 3)
        self.extents = np.asarray(self.extents, dtype=np.float64)
        if np.max(np.abs(self.basis @ self.basis.T - np.eye(3))) > _ORTHO_TOL:
            raise DomainError("box basis must be orthonormal")
        if np.min(self.extents) <= 0:
            raise DomainError("box extents must be positive")
        if self.face_res < 1:
            raise DomainError("face resolution must be >= 1")


@dataclass(frozen=True)
class PlaneGeometry:
    """Enough to invert pixel -> world for a rendered slice."""
    center: tuple[float, float, float]
    u: tuple[float, float, float]
    v: tuple[float, float, float]
    hu: float
    hv: float
    scale: float

    @classmethod
    def of(cls, p: PlaneSlicer, scale: float) -> "PlaneGeometry":
        return cls(tuple(p.center), tuple(p.u), tuple(p.v), p.hu, p.hv, scale)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "u": list(self.u),
                "v": list(self.v), "hu": self.hu, "hv": self.hv,
                "scale": self.scale}


@dataclass
class SliceImage:
    rgba: np.ndarray             # (H, W, 4) uint8
    labels: np.ndarray           # (H, W) uint16
    geometry: PlaneGeometry

    @property
    def width(self) -> int:
        return self.rgba.shape[1]

    @property
    def height(self) -> int:
        return self.rgba.shape[0]


def plane_pixel_to_world(p: PlaneSlicer, i, j, scale: float = 1.0):
    """World point at the center of pixel (i, j) of the scaled raster."""
    if not (0 < scale <= 1):
        raise DomainError("scale must be in (0, 1]")
    ws = scaled_dim(p.width, scale)
    hs = scaled_dim(p.height, scale)
    i = np.asarray(i)
    j = np.asarray(j)
    if np.any(i < 0) or np.any(i >= ws) or np.any(j < 0) or np.any(j >= hs):
        raise DomainError("pixel index out of range")
    a = ((i + 0.5) / ws - 0.5) * 2 * p.hu
    b = (0.5 - (j + 0.5) / hs) * 2 * p.hv
    return (p.center + a[..., None] * p.u + b[..., None] * p.v
            if a.ndim else p.center + a * p.u + b * p.v)


def plane_world_to_pixel(geom: PlaneGeometry, width: int, height: int,
                         q) -> tuple[int, int]:
    """Containing pixel of an on-plane world point (clamped at the max edge)."""
    c = np.asarray(geom.center)
    a = float((np.asarray(q) - c) @ np.asarray(geom.u))
    b = float((np.asarray(q) - c) @ np.asarray(geom.v))
    i = int(math.floor((a / (2 * geom.hu) + 0.5) * width))
    j = int(math.floor((0.5 - b / (2 * geom.hv)) * height))
    return min(max(i, 0), width - 1), min(max(j, 0), height - 1)


def render_plane_slice(p: PlaneSlicer, vol: ColorVolume,
                       lab: LabelVolume | None = None,
                       scale: float = 1.0) -> SliceImage:
    if not (0 < scale <= 1):
        raise DomainError("scale must be in (0, 1]")
    ws = scaled_dim(p.width, scale)
    hs = scaled_dim(p.height, scale)
    ii, jj = np.meshgrid(np.arange(ws), np.arange(hs))
    a = ((ii + 0.5) / ws - 0.5) * 2 * p.hu
    b = (0.5 - (jj + 0.5) / hs) * 2 * p.hv
    pts = (p.center[None, :] + a.reshape(-1, 1) * p.u[None, :]
           + b.reshape(-1, 1) * p.v[None, :])

    colors, inside = vol.sample_trilinear_many(pts)
    rgba = np.zeros((hs * ws, 4), dtype=np.uint8)
    rgba[inside, :3] = np.clip(_round_half_up(colors[inside]), 0, 255)
    rgba[inside, 3] = 255

    labels = np.zeros(hs * ws, dtype=np.uint16)
    if lab is not None:
        lv, linside = lab.sample_nearest_many(pts)
        labels[inside & linside] = lv[inside & linside]

    return SliceImage(rgba.reshape(hs, ws, 4), labels.reshape(hs, ws),
                      PlaneGeometry.of(p, scale))


# face order: +r0, -r0, +r1, -r1, +r2, -r2
FACE_NAMES = ("+r0", "-r0", "+r1", "-r1", "+r2", "-r2")


def box_face_planes(b: BoxSlicer) -> list[PlaneSlicer]:
    """The six face planes, oriented so u x v is the outward normal.

    +r_k uses u=r_{k+1}, v=r_{k+2}; -r_k flips u. Opposite faces therefore
    render mirror images of the same rectangle as the extent shrinks.
    """
    planes = []
    for k in range(3):
        r = b.basis
        e = b.extents
        k1, k2 = (k + 1) % 3, (k + 2) % 3
        for sign in (1.0, -1.0):
            planes.append(PlaneSlicer(
                center=b.center + sign * e[k] * r[k],
                u=sign * r[k1], v=r[k2],
                hu=float(e[k1]), hv=float(e[k2]),
                width=b.face_res, height=b.face_res))
    return planes


def render_box_faces(b: BoxSlicer, vol: ColorVolume,
                     lab: LabelVolume | None = None,
                     scale: float = 1.0) -> list[SliceImage]:
    return [render_plane_slice(p, vol, lab, scale) for p in box_face_planes(b)]


@dataclass
class FrameBudgetController:
    """EMA-based resolution ladder with asymmetric hysteresis.

    Over-budget EMA steps the scale down immediately; stepping back up needs
    a streak of low-cost frames. A step-up that gets knocked back down within
    ``fail_window`` frames doubles the required streak, so repeated failed
    probes become geometrically rarer instead of oscillating at a fixed rate.
    """
    budget_ms: float = 16.6
    ema_alpha: float = 0.2
    ladder: tuple[float, ...] = (1.0, 0.5, 0.25)
    step_up_fraction: float = 0.6
    step_up_streak: int = 10
    fail_window: int = 15

    ema_ms: float | None = None
    index: int = 0
    streak: int = 0
    required_streak: int = field(default=0)
    _since_step_up: int | None = field(default=None)

    def __post_init__(self):
        if self.required_streak == 0:
            self.required_streak = self.step_up_streak

    @property
    def scale(self) -> float:
        return self.ladder[self.index]

    def update(self, last_frame_ms: float) -> float:
        if last_frame_ms < 0:
            raise DomainError("frame time must be >= 0")
        if self.ema_ms is None:
            self.ema_ms = float(last_frame_ms)
        else:
            self.ema_ms = (self.ema_alpha * last_frame_ms
                           + (1 - self.ema_alpha) * self.ema_ms)
        if self._since_step_up is not None:
            self._since_step_up += 1

        if self.ema_ms > self.budget_ms:
            if self.index < len(self.ladder) - 1:
                self.index += 1
                if (self._since_step_up is not None
                        and self._since_step_up <= self.fail_window):
                    self.required_streak *= 2
                self._since_step_up = None
            self.streak = 0
        elif self.ema_ms < self.step_up_fraction * self.budget_ms:
            self.streak += 1
            if self.streak >= self.required_streak:
                if self.index > 0:
                    self.index -= 1
                    self._since_step_up = 0
                self.streak = 0
        else:
            self.streak = 0
        return self.scale


def controller_update(ctl: FrameBudgetController, last_frame_ms: float) -> float:
    return ctl.update(last_frame_ms)


def timed_render(fn, *args, **kwargs):
    """Run a render callable and return (result, elapsed_ms)."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, (time.perf_counter() - t0) * 1000.0


def slice_to_png_bytes(img: SliceImage) -> bytes:
    from PIL import Image
    buf = io.BytesIO()
    Image.fromarray(img.rgba, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def geometry_sidecar_text(geom: PlaneGeometry) -> str:
    def fmt(vec):
        return " ".join(repr(float(x)) for x in vec)
    return (f"center={fmt(geom.center)}\n"
            f"u={fmt(geom.u)}\n"
            f"v={fmt(geom.v)}\n"
            f"hu={geom.hu!r}\n"
            f"hv={geom.hv!r}\n"
            f"scale={geom.scale!r}\n")


def save_slice_png(img: SliceImage, path) -> None:
    """Write the RGBA PNG plus a <path>.txt geometry sidecar."""
    with open(path, "wb") as f:
        f.write(slice_to_png_bytes(img))
    with open(str(path) + ".txt", "w") as f:
        f.write(geometry_sidecar_text(img.geometry))


def save_slice_ppm(img: SliceImage, path) -> None:
    """Binary PPM (RGB over black) plus the same geometry sidecar."""
    rgb = img.rgba[..., :3]
    with open(path, "wb") as f:
        f.write(f"P6\n{img.width} {img.height}\n255\n".encode())
        f.write(rgb.tobytes())
    with open(str(path) + ".txt", "w") as f:
        f.write(geometry_sidecar_text(img.geometry))
