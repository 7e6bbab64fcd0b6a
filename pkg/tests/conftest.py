import numpy as np
import pytest

import voxslice as vx
from voxslice.codec import CompressedSlice


def random_volume(nx, ny, nz, seed=0, z_table=None):
    """Seeded random compressed color volume."""
    rng = np.random.default_rng(seed)
    if z_table is None:
        z_table = np.arange(nz, dtype=float)
    meta = vx.VolumeMeta(nx, ny, nz, 1.0, 1.0, z_table=z_table)
    stack = rng.integers(0, 256, (nz, ny, nx, 3), dtype=np.uint8)
    vol = vx.ColorVolume(meta, [CompressedSlice.encode(s) for s in stack])
    return vol


@pytest.fixture
def sphere_phantom():
    """16x12x6 phantom with one ellipsoid, compressed with labels."""
    spec = vx.PhantomSpec(
        nx=16, ny=12, nz=6,
        ellipsoids=[vx.Ellipsoid((8, 6, 3), (5, 4, 2), 1, "blob",
                                 (200, 60, 60))])
    stack, lab = vx.generate_phantom(spec)
    vol, lab2 = vx.compress_volume(stack, lab.meta, 1,
                                   table=[vx.ColorKey(1, (200, 60, 60))])
    return vol, lab2


@pytest.fixture
def two_blob_phantom():
    spec = vx.PhantomSpec(
        nx=32, ny=32, nz=16,
        ellipsoids=[
            vx.Ellipsoid((10, 10, 8), (7, 7, 6), 1, "liver", (180, 60, 40)),
            vx.Ellipsoid((22, 22, 8), (6, 6, 5), 2, "kidney", (60, 40, 160)),
        ])
    stack, lab = vx.generate_phantom(spec)
    vol, lab2 = vx.compress_volume(
        stack, lab.meta, 1,
        table=[vx.ColorKey(1, (180, 60, 40)), vx.ColorKey(2, (60, 40, 160))])
    return vol, lab2
