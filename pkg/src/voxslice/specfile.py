"""Text-file formats for the CLI: phantom specs, spacing manifests,
color-key tables.

All three share one shape: ``key=value`` lines, ``#`` comments, and an
optional ``z_table:`` header followed by one z position per line.
"""

from __future__ import annotations

import numpy as np

from .codec import ColorKey
from .phantom import Ellipsoid, GradientField, PhantomSpec
from .volume import DomainError


class SpecFileError(ValueError):
    """Malformed spec/manifest/keys file; the message names the bad field."""


def _split_kv(line: str) -> tuple[str, str]:
    if "=" not in line:
        raise SpecFileError(f"expected key=value, got {line!r}")
    k, v = line.split("=", 1)
    return k.strip(), v.strip()


def _triple(text: str, key: str, cast=float):
    parts = text.split(",")
    if len(parts) != 3:
        raise SpecFileError(f"{key} must be three comma-separated values")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise SpecFileError(f"bad number in {key}: {text!r}")


def _fields(rest: str) -> dict[str, str]:
    return dict(_split_kv(tok) for tok in rest.split())


def parse_phantom_spec(text: str) -> PhantomSpec:
    kv: dict[str, str] = {}
    ellipsoids: list[Ellipsoid] = []
    gradient = None
    z_values: list[float] | None = None
    in_z = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_z:
            try:
                z_values.append(float(line))
                continue
            except ValueError:
                in_z = False        # fall through: z block ended
        if line == "z_table:":
            in_z = True
            z_values = []
            continue
        if line.startswith("ellipsoid:"):
            f = _fields(line[len("ellipsoid:"):])
            try:
                ellipsoids.append(Ellipsoid(
                    center=_triple(f["center"], "center"),
                    semi_axes=_triple(f["axes"], "axes"),
                    label_id=int(f["label"]),
                    name=f.get("name", f"label {f['label']}"),
                    color=_triple(f["color"], "color", int)))
            except KeyError as e:
                raise SpecFileError(f"ellipsoid missing field {e.args[0]}")
            except DomainError as e:
                raise SpecFileError(f"bad ellipsoid: {e}")
            continue
        if line.startswith("gradient:"):
            f = _fields(line[len("gradient:"):])
            gradient = GradientField(
                coeff_x=_triple(f.get("x", "0,0,0"), "x"),
                coeff_y=_triple(f.get("y", "0,0,0"), "y"),
                coeff_z=_triple(f.get("z", "0,0,0"), "z"),
                offset=_triple(f.get("offset", "0,0,0"), "offset"))
            continue
        k, v = _split_kv(line)
        kv[k] = v

    try:
        nx, ny, nz = int(kv["nx"]), int(kv["ny"]), int(kv["nz"])
    except KeyError as e:
        raise SpecFileError(f"missing field {e.args[0]}")
    except ValueError:
        raise SpecFileError("nx/ny/nz must be integers")
    if nx < 1 or ny < 1 or nz < 1:
        raise SpecFileError("nx/ny/nz must be >= 1")

    if z_values is not None:
        if len(z_values) != nz:
            raise SpecFileError("z_table length must equal nz")
        z_table = np.asarray(z_values)
    else:
        z_table = np.arange(nz) * float(kv.get("z_step", 1.0))

    return PhantomSpec(
        nx=nx, ny=ny, nz=nz,
        sx=float(kv.get("sx", 1.0)), sy=float(kv.get("sy", 1.0)),
        z_table=z_table,
        origin=_triple(kv.get("origin", "0,0,0"), "origin"),
        ellipsoids=ellipsoids,
        background=_triple(kv.get("background", "20,20,20"), "background", int),
        gradient=gradient,
        seed=int(kv.get("seed", 0)))


def parse_manifest(text: str) -> dict:
    """Spacing manifest: sx, sy, optional origin, and a z_table: block."""
    kv: dict[str, str] = {}
    z_values: list[float] = []
    in_z = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "z_table:":
            in_z = True
            continue
        if in_z:
            try:
                z_values.append(float(line))
            except ValueError:
                raise SpecFileError(f"bad z value {line!r}")
            continue
        k, v = _split_kv(line)
        kv[k] = v
    if "sx" not in kv or "sy" not in kv:
        raise SpecFileError("manifest must set sx and sy")
    if not z_values:
        raise SpecFileError("manifest must contain a z_table: block")
    return {"sx": float(kv["sx"]), "sy": float(kv["sy"]),
            "origin": _triple(kv.get("origin", "0,0,0"), "origin"),
            "z_table": np.asarray(z_values)}


def format_manifest(sx: float, sy: float, origin, z_table) -> str:
    lines = [f"sx={sx!r}", f"sy={sy!r}",
             "origin=" + ",".join(repr(float(x)) for x in origin),
             "z_table:"]
    lines += [repr(float(z)) for z in z_table]
    return "\n".join(lines) + "\n"


def parse_color_keys(text: str) -> tuple[list[ColorKey], dict[int, str]]:
    """Key table lines: label=ID color=R,G,B [tol=R,G,B] [name=...]."""
    keys: list[ColorKey] = []
    names: dict[int, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        f = _fields(line)
        try:
            lid = int(f["label"])
            key = ColorKey(lid, _triple(f["color"], "color", int),
                           _triple(f.get("tol", "0,0,0"), "tol", int))
        except KeyError as e:
            raise SpecFileError(f"key entry missing field {e.args[0]}")
        keys.append(key)
        if "name" in f:
            names[lid] = f["name"]
    return keys, names


def format_color_keys(keys: list[ColorKey], names: dict[int, str]) -> str:
    lines = []
    for k in keys:
        parts = [f"label={k.label_id}",
                 "color=" + ",".join(str(c) for c in k.key),
                 "tol=" + ",".join(str(t) for t in k.tolerance)]
        if k.label_id in names:
            parts.append(f"name={names[k.label_id]}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
