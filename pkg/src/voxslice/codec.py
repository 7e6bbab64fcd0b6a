"""Ingestion codec: downsampling, color-key masks, BC1 block compression.

BC1 layout per 4x4 block (8 bytes, little-endian): two RGB565 endpoints
c0, c1 followed by a u32 of sixteen 2-bit palette indices, texel 0
(top-left, row-major) in the lowest bits. The encoder always emits the
4-color mode (c0 > c1); the decoder handles both modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .volume import ColorVolume, DomainError, LabelVolume, VolumeMeta

BLOCK_BYTES = 8


def expand_565_to_888(c: int) -> tuple[int, int, int]:
    """Expand an RGB565 word to 8-bit channels by bit replication."""
    r5 = (c >> 11) & 0x1F
    g6 = (c >> 5) & 0x3F
    b5 = c & 0x1F
    return ((r5 << 3) | (r5 >> 2), (g6 << 2) | (g6 >> 4), (b5 << 3) | (b5 >> 2))


def quantize_888_to_565(rgb) -> int:
    """Round-half-up quantization of 8-bit RGB to an RGB565 word."""
    r, g, b = (int(v) for v in rgb)
    r5 = (r * 62 + 255) // 510
    g6 = (g * 126 + 255) // 510
    b5 = (b * 62 + 255) // 510
    return (r5 << 11) | (g6 << 5) | b5


def _palette_888(c0: int, c1: int) -> np.ndarray:
    """4-entry decode palette for endpoint words c0, c1, shape (4,3) int."""
    p0 = np.array(expand_565_to_888(c0), dtype=np.int64)
    p1 = np.array(expand_565_to_888(c1), dtype=np.int64)
    if c0 > c1:
        p2 = (2 * p0 + p1) // 3
        p3 = (p0 + 2 * p1) // 3
    else:
        p2 = (p0 + p1) // 2
        p3 = np.zeros(3, dtype=np.int64)
    return np.stack([p0, p1, p2, p3])


def bc1_decode_block(block: bytes) -> np.ndarray:
    """Decode one 8-byte block to (16, 3) uint8 texels in row-major order."""
    if len(block) != BLOCK_BYTES:
        raise DomainError("BC1 block must be exactly 8 bytes")
    c0 = int.from_bytes(block[0:2], "little")
    c1 = int.from_bytes(block[2:4], "little")
    bits = int.from_bytes(block[4:8], "little")
    pal = _palette_888(c0, c1)
    idx = (bits >> (2 * np.arange(16))) & 0x3
    return pal[idx].astype(np.uint8)


def bc1_encode_block(texels) -> bytes:
    """Encode 16 RGB texels into one BC1 block.

    Endpoints are the texel pair with maximum RGB distance (ties broken by
    the lexicographically lowest index pair), quantized to 565 and ordered
    c0 > c1. Equal quantized endpoints degenerate to a uniform block.
    """
    texels = np.asarray(texels, dtype=np.int64)
    if texels.shape != (16, 3):
        raise DomainError("bc1_encode_block expects exactly 16 RGB texels")
    d = texels[:, None, :] - texels[None, :, :]
    dist = np.sum(d * d, axis=-1)
    dist[np.tril_indices(16)] = -1          # keep i<j pairs, first-max wins
    i, j = np.unravel_index(int(np.argmax(dist)), (16, 16))

    qa = quantize_888_to_565(texels[i])
    qb = quantize_888_to_565(texels[j])
    c0, c1 = max(qa, qb), min(qa, qb)
    if c0 == c1:
        bits = 0
    else:
        pal = _palette_888(c0, c1)
        dd = texels[:, None, :] - pal[None, :, :]
        idx = np.argmin(np.sum(dd * dd, axis=-1), axis=1)  # first min = lower index
        bits = int(np.sum(idx.astype(np.uint64) << (2 * np.arange(16, dtype=np.uint64))))
    return (c0.to_bytes(2, "little") + c1.to_bytes(2, "little")
            + bits.to_bytes(4, "little"))


def _pad_to_blocks(img: np.ndarray) -> np.ndarray:
    """Pad (h, w, 3) to multiples of 4 by clamping edge texels."""
    h, w = img.shape[:2]
    ph = (-h) % 4
    pw = (-w) % 4
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)), mode="edge")
    return img


def _encode_blocks(tex: np.ndarray) -> np.ndarray:
    """Vectorized BC1 encode of (n, 16, 3) texel blocks to (n, 8) uint8."""
    tex = tex.astype(np.int64)
    n = tex.shape[0]
    d = tex[:, :, None, :] - tex[:, None, :, :]
    dist = np.sum(d * d, axis=-1)                       # (n, 16, 16)
    tl = np.tril_indices(16)
    dist[:, tl[0], tl[1]] = -1
    flat = np.argmax(dist.reshape(n, 256), axis=1)
    pi, pj = flat // 16, flat % 16
    ta = tex[np.arange(n), pi]
    tb = tex[np.arange(n), pj]

    def q565(t):
        r5 = (t[:, 0] * 62 + 255) // 510
        g6 = (t[:, 1] * 126 + 255) // 510
        b5 = (t[:, 2] * 62 + 255) // 510
        return (r5 << 11) | (g6 << 5) | b5

    qa, qb = q565(ta), q565(tb)
    c0 = np.maximum(qa, qb)
    c1 = np.minimum(qa, qb)

    def expand(c):
        r5 = (c >> 11) & 0x1F
        g6 = (c >> 5) & 0x3F
        b5 = c & 0x1F
        return np.stack([(r5 << 3) | (r5 >> 2),
                         (g6 << 2) | (g6 >> 4),
                         (b5 << 3) | (b5 >> 2)], axis=-1)

    p0 = expand(c0)
    p1 = expand(c1)
    pal = np.stack([p0, p1, (2 * p0 + p1) // 3, (p0 + 2 * p1) // 3], axis=1)
    dd = tex[:, :, None, :] - pal[:, None, :, :]
    idx = np.argmin(np.sum(dd * dd, axis=-1), axis=2)   # (n, 16)
    idx[c0 == c1] = 0
    bits = np.zeros(n, dtype=np.uint64)
    for t in range(16):
        bits |= idx[:, t].astype(np.uint64) << np.uint64(2 * t)

    out = np.empty((n, 8), dtype=np.uint8)
    out[:, 0] = c0 & 0xFF
    out[:, 1] = c0 >> 8
    out[:, 2] = c1 & 0xFF
    out[:, 3] = c1 >> 8
    for b in range(4):
        out[:, 4 + b] = ((bits >> np.uint64(8 * b)) & np.uint64(0xFF)).astype(np.uint8)
    return out


@dataclass
class CompressedSlice:
    """One BC1-compressed raster: payload is blocks in row-major block order."""
    width: int
    height: int
    payload: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DomainError("slice dims must be >= 1")
        if len(self.payload) != self.block_count() * BLOCK_BYTES:
            raise DomainError("payload length does not match block count")

    def blocks_wide(self) -> int:
        return (self.width + 3) // 4

    def blocks_high(self) -> int:
        return (self.height + 3) // 4

    def block_count(self) -> int:
        return self.blocks_wide() * self.blocks_high()

    @classmethod
    def encode(cls, img) -> "CompressedSlice":
        """Compress an (h, w, 3) uint8 raster."""
        img = np.asarray(img, dtype=np.uint8)
        h, w = img.shape[:2]
        padded = _pad_to_blocks(img)
        bh, bw = padded.shape[0] // 4, padded.shape[1] // 4
        tex = (padded.reshape(bh, 4, bw, 4, 3)
               .transpose(0, 2, 1, 3, 4)
               .reshape(bh * bw, 16, 3))
        return cls(w, h, _encode_blocks(tex).tobytes())

    def block(self, bx: int, by: int) -> bytes:
        off = (by * self.blocks_wide() + bx) * BLOCK_BYTES
        return self.payload[off:off + BLOCK_BYTES]

    def decode(self) -> np.ndarray:
        """Full decode to (height, width, 3) uint8."""
        bw, bh = self.blocks_wide(), self.blocks_high()
        raw = np.frombuffer(self.payload, dtype=np.uint8).reshape(bw * bh, 8)
        c0 = raw[:, 0].astype(np.int64) | (raw[:, 1].astype(np.int64) << 8)
        c1 = raw[:, 2].astype(np.int64) | (raw[:, 3].astype(np.int64) << 8)
        bits = (raw[:, 4].astype(np.uint64)
                | (raw[:, 5].astype(np.uint64) << np.uint64(8))
                | (raw[:, 6].astype(np.uint64) << np.uint64(16))
                | (raw[:, 7].astype(np.uint64) << np.uint64(24)))

        def expand(c):
            r5 = (c >> 11) & 0x1F
            g6 = (c >> 5) & 0x3F
            b5 = c & 0x1F
            return np.stack([(r5 << 3) | (r5 >> 2),
                             (g6 << 2) | (g6 >> 4),
                             (b5 << 3) | (b5 >> 2)], axis=-1)

        p0, p1 = expand(c0), expand(c1)
        four = c0 > c1
        p2 = np.where(four[:, None], (2 * p0 + p1) // 3, (p0 + p1) // 2)
        p3 = np.where(four[:, None], (p0 + 2 * p1) // 3, 0)
        pal = np.stack([p0, p1, p2, p3], axis=1)        # (n, 4, 3)

        shifts = np.uint64(2) * np.arange(16, dtype=np.uint64)
        idx = ((bits[:, None] >> shifts[None, :]) & np.uint64(3)).astype(np.int64)
        tex = pal[np.arange(len(pal))[:, None], idx]     # (n, 16, 3)
        img = (tex.reshape(bh, bw, 4, 4, 3)
               .transpose(0, 2, 1, 3, 4)
               .reshape(bh * 4, bw * 4, 3))
        return img[:self.height, :self.width].astype(np.uint8)


def decode_texel(slice_: CompressedSlice, x: int, y: int) -> tuple[int, int, int]:
    """Random-access decode of one texel without touching other blocks."""
    if not (0 <= x < slice_.width and 0 <= y < slice_.height):
        raise DomainError(f"texel ({x},{y}) out of range")
    tex = bc1_decode_block(slice_.block(x // 4, y // 4))
    r, g, b = tex[(y % 4) * 4 + (x % 4)]
    return int(r), int(g), int(b)


def downsample_slice(img, factor: int) -> np.ndarray:
    """Box-mean downsample with round-half-up; edge boxes are truncated."""
    if factor < 1:
        raise DomainError("downsample factor must be >= 1")
    img = np.asarray(img, dtype=np.uint8)
    if factor == 1:
        return img.copy()
    h, w = img.shape[:2]
    oh, ow = (h + factor - 1) // factor, (w + factor - 1) // factor
    out = np.empty((oh, ow, 3), dtype=np.uint8)
    # cumulative-sum box sums handle truncated edge boxes exactly
    cs = np.zeros((h + 1, w + 1, 3), dtype=np.int64)
    cs[1:, 1:] = np.cumsum(np.cumsum(img.astype(np.int64), axis=0), axis=1)
    ys = np.minimum(np.arange(oh + 1) * factor, h)
    xs = np.minimum.reduce([np.arange(ow + 1) * factor, np.full(ow + 1, w)])
    sums = (cs[ys[1:], :][:, xs[1:]] - cs[ys[:-1], :][:, xs[1:]]
            - cs[ys[1:], :][:, xs[:-1]] + cs[ys[:-1], :][:, xs[:-1]])
    counts = ((ys[1:] - ys[:-1])[:, None] * (xs[1:] - xs[:-1])[None, :])[..., None]
    out[:] = (2 * sums + counts) // (2 * counts)
    return out


@dataclass
class ColorKey:
    label_id: int
    key: tuple[int, int, int]
    tolerance: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if min(self.tolerance) < 0:
            raise DomainError("color-key tolerance must be >= 0")


def map_colors_to_labels(img, table: list[ColorKey]) -> np.ndarray:
    """First-match color keying: unmatched pixels get background label 0."""
    img = np.asarray(img, dtype=np.int64)
    out = np.zeros(img.shape[:2], dtype=np.uint16)
    assigned = np.zeros(img.shape[:2], dtype=bool)
    for entry in table:
        key = np.asarray(entry.key, dtype=np.int64)
        tol = np.asarray(entry.tolerance, dtype=np.int64)
        hit = np.all(np.abs(img - key) <= tol, axis=-1) & ~assigned
        out[hit] = entry.label_id
        assigned |= hit
    return out


def compress_volume(stack, meta: VolumeMeta, factor: int,
                    table: list[ColorKey] | None = None,
                    ) -> tuple[ColorVolume, LabelVolume | None]:
    """Full ingestion pipeline: downsample, optional color keys, BC1.

    The downsampled grid keeps the input origin and z_table; in-plane
    spacing scales by the factor.
    """
    stack = np.asarray(stack, dtype=np.uint8)
    if stack.ndim != 4 or stack.shape[3] != 3:
        raise DomainError("stack must be (nz, h, w, 3)")
    if stack.shape[0] != meta.nz or stack.shape[1:3] != (meta.ny, meta.nx):
        raise DomainError("stack dims do not match meta")

    down = [downsample_slice(s, factor) for s in stack]
    oh, ow = down[0].shape[:2]
    new_meta = VolumeMeta(ow, oh, meta.nz, meta.sx * factor, meta.sy * factor,
                          z_table=meta.z_table, origin=meta.origin,
                          palette=meta.palette)
    vol = ColorVolume(new_meta, [CompressedSlice.encode(s) for s in down])
    lab = None
    if table is not None:
        grids = np.stack([map_colors_to_labels(s, table) for s in down])
        lab = LabelVolume(new_meta, grids)
    return vol, lab
