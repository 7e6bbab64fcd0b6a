"""Operator command line: phantom, ingest, info, slice, bench, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import codec, specfile, vhs1
from .phantom import generate_phantom
from .slicer import (PlaneSlicer, render_plane_slice, save_slice_png,
                     save_slice_ppm)
from .volume import DomainError, PaletteEntry, VolumeMeta

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


class CliError(Exception):
    pass


def _vec3(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError(f"expected three comma-separated numbers, got {text!r}")
    return np.asarray([float(p) for p in parts])


def cmd_phantom(args) -> int:
    spec = specfile.parse_phantom_spec(Path(args.spec).read_text())
    stack, lab = generate_phantom(spec)
    meta = lab.meta
    out = Path(args.out)
    if args.compress:
        vol, lab2 = codec.compress_volume(stack, meta, args.factor,
                                          table=_keys_from_spec(spec))
        vhs1.write_vhs1(out, vol, lab2)
        print(f"wrote {out} ({out.stat().st_size} bytes)")
    else:
        from PIL import Image
        out.mkdir(parents=True, exist_ok=True)
        for k in range(meta.nz):
            Image.fromarray(stack[k], mode="RGB").save(
                out / f"slice_{k:05d}.png")
        (out / "manifest.txt").write_text(specfile.format_manifest(
            meta.sx, meta.sy, meta.origin, meta.z_table))
        keys = _keys_from_spec(spec)
        names = {p.label_id: p.name for p in meta.palette}
        (out / "keys.txt").write_text(specfile.format_color_keys(keys, names))
        print(f"wrote {meta.nz} slices to {out}")
    return EXIT_OK


def _keys_from_spec(spec) -> list[codec.ColorKey]:
    # exact-color keys recover the generator's labels (flat-color phantoms)
    keys = []
    seen = set()
    for e in reversed(spec.ellipsoids):   # later ellipsoids painted last
        if e.label_id in seen:
            continue
        seen.add(e.label_id)
        keys.append(codec.ColorKey(e.label_id, e.color))
    return keys


def cmd_ingest(args) -> int:
    from PIL import Image
    src = Path(args.src)
    manifest_path = src / "manifest.txt"
    if not manifest_path.exists():
        raise CliError(f"missing spacing manifest {manifest_path}")
    man = specfile.parse_manifest(manifest_path.read_text())

    files = sorted(p for p in src.iterdir()
                   if p.suffix.lower() in (".png", ".ppm", ".bmp", ".jpg"))
    if not files:
        raise CliError(f"no slice images in {src}")
    slices = []
    dims = None
    for p in files:
        arr = np.asarray(Image.open(p).convert("RGB"))
        if dims is None:
            dims = arr.shape
        elif arr.shape != dims:
            raise CliError(f"slice {p.name} has dims {arr.shape[1::-1]}, "
                           f"expected {dims[1::-1]}")
        slices.append(arr)
    if len(slices) != len(man["z_table"]):
        raise CliError("slice count does not match manifest z_table")

    keys, names = (None, {})
    if args.keys:
        keys, names = specfile.parse_color_keys(Path(args.keys).read_text())
    palette = [  # palette from the key table; unnamed ids get a placeholder
        PaletteEntry(k.label_id, names.get(k.label_id, f"label {k.label_id}"),
                     k.key)
        for k in (keys or [])]

    h, w = dims[:2]
    meta = VolumeMeta(w, h, len(slices), man["sx"], man["sy"],
                      z_table=man["z_table"], origin=np.asarray(man["origin"]),
                      palette=palette)
    stack = np.stack(slices)
    raw_bytes = stack.nbytes

    t0 = time.perf_counter()
    vol, lab = codec.compress_volume(stack, meta, args.factor, table=keys)
    vhs1.write_vhs1(args.out, vol, lab)
    elapsed = time.perf_counter() - t0

    color_payload = sum(len(s.payload) for s in vol.slices)
    down_raw = vol.meta.nx * vol.meta.ny * 3 * vol.meta.nz
    file_bytes = Path(args.out).stat().st_size
    print(f"ingested {len(slices)} slices in {elapsed:.2f} s")
    print(f"color payload ratio (vs downsampled raw): "
          f"{down_raw / color_payload:.1f}:1")
    print(f"end-to-end ratio (file vs raw stack): "
          f"{raw_bytes / file_bytes:.1f}:1")
    return EXIT_OK


def cmd_info(args) -> int:
    vol, lab = vhs1.read_vhs1(args.file)
    m = vol.meta
    print(f"dims: {m.nx} x {m.ny} x {m.nz}")
    print(f"spacing: sx={m.sx:g} sy={m.sy:g} "
          f"z=[{m.z_table[0]:g} .. {m.z_table[-1]:g}]")
    print(f"origin: {m.origin[0]:g},{m.origin[1]:g},{m.origin[2]:g}")
    print(f"labels: {'yes' if lab is not None else 'no'}")
    for p in m.palette:
        print(f"  {p.label_id}: {p.name} {p.color}")
    return EXIT_OK


def cmd_slice(args) -> int:
    vol, lab = vhs1.read_vhs1(args.file)
    if args.axial is not None:
        from .command import default_plane
        plane = default_plane(vol.meta, "axial", args.axial)
    else:
        for name in ("center", "u", "v"):
            if getattr(args, name) is None:
                raise CliError(f"--{name} is required without --axial")
        u = _vec3(args.u)
        v = _vec3(args.v)
        u = u / np.linalg.norm(u)
        v = v - (v @ u) * u
        v = v / np.linalg.norm(v)
        plane = PlaneSlicer(center=_vec3(args.center), u=u, v=v,
                            hu=args.hu, hv=args.hv,
                            width=args.width, height=args.height)
    img = render_plane_slice(plane, vol, lab, scale=args.scale)
    if args.out.endswith(".ppm"):
        save_slice_ppm(img, args.out)
    else:
        save_slice_png(img, args.out)
    print(f"wrote {args.out} ({img.width}x{img.height})")
    return EXIT_OK


def _oblique_plane(meta: VolumeMeta, width=512, height=512) -> PlaneSlicer:
    n = np.asarray([0.4, 0.3, 0.866])
    n = n / np.linalg.norm(n)
    u = np.cross(n, [0.0, 0.0, 1.0])
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    span = max(meta.nx * meta.sx, meta.ny * meta.sy,
               float(meta.z_table[-1] - meta.z_table[0]) + 1.0) / 2.0
    return PlaneSlicer(center=meta.volume_center(), u=u, v=v,
                       hu=span, hv=span, width=width, height=height)


def cmd_bench(args) -> int:
    vol, lab = vhs1.read_vhs1(args.file)
    plane = _oblique_plane(vol.meta)
    writer = csv.writer(sys.stdout)
    writer.writerow(["kind", "scale", "median_ms", "p95_ms", "throughput"])
    if args.iterations <= 0:
        return EXIT_OK

    def p95(xs):
        xs = sorted(xs)
        return xs[min(len(xs) - 1, int(0.95 * len(xs)))]

    for scale in (1.0, 0.5, 0.25):
        times = []
        for _ in range(args.iterations):
            t0 = time.perf_counter()
            img = render_plane_slice(plane, vol, lab, scale=scale)
            times.append((time.perf_counter() - t0) * 1000.0)
        px_per_ms = img.width * img.height / statistics.median(times)
        writer.writerow(["render", scale,
                         f"{statistics.median(times):.3f}",
                         f"{p95(times):.3f}", f"{px_per_ms:.0f}"])

    # texel-decode throughput: random-access decodes across the volume
    rng = np.random.default_rng(0)
    m = vol.meta
    n_probe = 20000
    xs = rng.integers(0, m.nx, n_probe)
    ys = rng.integers(0, m.ny, n_probe)
    ks = rng.integers(0, m.nz, n_probe)
    times = []
    for _ in range(args.iterations):
        t0 = time.perf_counter()
        for x, y, k in zip(xs, ys, ks):
            codec.decode_texel(vol.slices[k], int(x), int(y))
        times.append((time.perf_counter() - t0) * 1000.0)
    tx_per_ms = n_probe / statistics.median(times)
    writer.writerow(["texel_decode", 1.0,
                     f"{statistics.median(times):.3f}",
                     f"{p95(times):.3f}", f"{tx_per_ms:.0f}"])
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    volumes = {}
    for path in args.files:
        vol, lab = vhs1.read_vhs1(path)
        volumes[Path(path).stem] = (vol, lab)
    host, _, port = args.listen.rpartition(":")
    app = create_app(volumes)
    print(f"serving {sorted(volumes)} on {args.listen}")
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port),
                    log_level="info")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="voxslice",
                description="volumetric slicing toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("phantom", help="rasterize a phantom spec")
    sp.add_argument("spec")
    sp.add_argument("out")
    sp.add_argument("--compress", action="store_true",
                    help="write a VHS1 file instead of raw slices")
    sp.add_argument("--factor", type=int, default=1)
    sp.set_defaults(func=cmd_phantom)

    sp = sub.add_parser("ingest", help="compress a slice directory to VHS1")
    sp.add_argument("src")
    sp.add_argument("--factor", type=int, default=1)
    sp.add_argument("--keys", default=None)
    sp.add_argument("-o", "--out", required=True)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("info", help="print VHS1 header summary")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("slice", help="render one plane slice to an image")
    sp.add_argument("file")
    sp.add_argument("--axial", type=float, default=None,
                    help="axial preset at this world z (mm)")
    sp.add_argument("--center", default=None)
    sp.add_argument("--u", default=None)
    sp.add_argument("--v", default=None)
    sp.add_argument("--hu", type=float, default=50.0)
    sp.add_argument("--hv", type=float, default=50.0)
    sp.add_argument("--width", type=int, default=256)
    sp.add_argument("--height", type=int, default=256)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("-o", "--out", required=True)
    sp.set_defaults(func=cmd_slice)

    sp = sub.add_parser("bench", help="render/decode latency CSV")
    sp.add_argument("file")
    sp.add_argument("--iterations", type=int, default=20)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("serve", help="run the session server")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--listen", default="127.0.0.1:8765")
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (CliError, specfile.SpecFileError, DomainError,
            vhs1.FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
