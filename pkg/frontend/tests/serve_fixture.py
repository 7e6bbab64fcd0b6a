"""Serve a small labeled phantom for the viewer integration test.

Usage: python3 serve_fixture.py PORT
"""

import sys

import uvicorn

import voxslice as vx
from voxslice.service import create_app

spec = vx.PhantomSpec(
    nx=32, ny=32, nz=16,
    ellipsoids=[vx.Ellipsoid((16, 16, 8), (10, 9, 6), 1, "sphere",
                             (200, 60, 60))])
stack, lab = vx.generate_phantom(spec)
vol, lab2 = vx.compress_volume(stack, lab.meta, 1,
                               table=[vx.ColorKey(1, (200, 60, 60))])

uvicorn.run(create_app({"demo": (vol, lab2)}), host="127.0.0.1",
            port=int(sys.argv[1]), log_level="warning")
