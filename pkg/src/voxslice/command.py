"""Text command channel: grammar, structure-name resolution, session edits.

Grammar (case-insensitive keywords, whitespace-separated tokens):

    cmd  := ("show"|"display") name
          | "hide" name
          | "highlight" name
          | "unhighlight" (name | "all")
          | "slice" ("axial"|"coronal"|"sagittal") number ["mm"]
          | "move" "slice" signed-number ["mm"]
          | "reset"
          | "list"
    name := one or more word tokens (greedy to end of input)

Parsing is total: malformed input yields a ParseError value, never an
exception.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .slicer import PlaneSlicer
from .volume import DomainError, VolumeMeta

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


@dataclass(frozen=True)
class Show:
    name: str


@dataclass(frozen=True)
class Hide:
    name: str


@dataclass(frozen=True)
class Highlight:
    name: str


@dataclass(frozen=True)
class Unhighlight:
    name: str | None             # None means "all"


@dataclass(frozen=True)
class SlicePreset:
    axis: str                    # axial | coronal | sagittal
    position: float              # mm


@dataclass(frozen=True)
class MovePlane:
    offset: float                # mm along the plane normal


@dataclass(frozen=True)
class Reset:
    pass


@dataclass(frozen=True)
class ListStructures:
    pass


CommandAst = Union[Show, Hide, Highlight, Unhighlight, SlicePreset,
                   MovePlane, Reset, ListStructures]


@dataclass(frozen=True)
class ParseError:
    position: int                # token index of the offending token
    expected: str
    found: str                   # empty at end of input


_AXES = ("axial", "coronal", "sagittal")


def _parse_number(tokens: list[str], pos: int, what: str):
    """number ["mm"], which must end the input. Returns (value, err)."""
    if pos >= len(tokens):
        return None, ParseError(pos, what, "")
    tok = tokens[pos]
    if not _NUMBER.match(tok):
        return None, ParseError(pos, what, tok)
    value = float(tok)
    pos += 1
    if pos < len(tokens) and tokens[pos].lower() == "mm":
        pos += 1
    if pos < len(tokens):
        return None, ParseError(pos, "end of input", tokens[pos])
    return value, None


def parse_command(text: str) -> CommandAst | ParseError:
    tokens = text.split()
    if not tokens:
        return ParseError(0, "a command keyword", "")
    head = tokens[0].lower()

    if head in ("show", "display", "hide", "highlight"):
        if len(tokens) < 2:
            return ParseError(1, "a structure name", "")
        name = " ".join(tokens[1:])
        return {"show": Show, "display": Show,
                "hide": Hide, "highlight": Highlight}[head](name)

    if head == "unhighlight":
        if len(tokens) < 2:
            return ParseError(1, 'a structure name or "all"', "")
        if len(tokens) == 2 and tokens[1].lower() == "all":
            return Unhighlight(None)
        return Unhighlight(" ".join(tokens[1:]))

    if head == "slice":
        if len(tokens) < 2 or tokens[1].lower() not in _AXES:
            return ParseError(1, "an axis (axial, coronal, sagittal)",
                              tokens[1] if len(tokens) > 1 else "")
        value, err = _parse_number(tokens, 2, "a position in mm")
        if err:
            return err
        return SlicePreset(tokens[1].lower(), value)

    if head == "move":
        if len(tokens) < 2 or tokens[1].lower() != "slice":
            return ParseError(1, '"slice"',
                              tokens[1] if len(tokens) > 1 else "")
        value, err = _parse_number(tokens, 2, "a signed offset in mm")
        if err:
            return err
        return MovePlane(value)

    if head == "reset":
        if len(tokens) > 1:
            return ParseError(1, "end of input", tokens[1])
        return Reset()

    if head == "list":
        if len(tokens) > 1:
            return ParseError(1, "end of input", tokens[1])
        return ListStructures()

    return ParseError(0, "a command keyword", tokens[0])


def format_command(cmd: CommandAst) -> str:
    """Canonical text whose parse equals cmd (modulo name casing)."""
    if isinstance(cmd, Show):
        return f"show {cmd.name}"
    if isinstance(cmd, Hide):
        return f"hide {cmd.name}"
    if isinstance(cmd, Highlight):
        return f"highlight {cmd.name}"
    if isinstance(cmd, Unhighlight):
        return "unhighlight all" if cmd.name is None else f"unhighlight {cmd.name}"
    if isinstance(cmd, SlicePreset):
        return f"slice {cmd.axis} {cmd.position:g} mm"
    if isinstance(cmd, MovePlane):
        return f"move slice {cmd.offset:g} mm"
    if isinstance(cmd, Reset):
        return "reset"
    if isinstance(cmd, ListStructures):
        return "list"
    raise TypeError(f"not a command: {cmd!r}")


def _normalize(name: str) -> str:
    return " ".join(name.lower().split())


class SynonymTable:
    """Alias -> label id map, case-insensitive and whitespace-normalized."""

    def __init__(self, entries: dict[str, int] | None = None):
        self._map: dict[str, int] = {}
        for alias, lid in (entries or {}).items():
            key = _normalize(alias)
            if key in self._map:
                raise DomainError(f"duplicate alias {alias!r}")
            self._map[key] = lid

    def lookup(self, name: str) -> int | None:
        return self._map.get(_normalize(name))


def resolve_structure(name: str, palette, synonyms: SynonymTable | None = None):
    """Exact-match structure lookup; returns a label id or None."""
    key = _normalize(name)
    for p in palette:
        if _normalize(p.name) == key:
            return p.label_id
    if synonyms is not None:
        return synonyms.lookup(name)
    return None


def default_plane(meta: VolumeMeta, axis: str = "axial",
                  position: float | None = None) -> PlaneSlicer:
    """Axis-aligned preset covering the full volume cross-section.

    Axial planes use one pixel per voxel, so a plane through z_table[k]
    reproduces stored slice k exactly.
    """
    if axis not in _AXES:
        raise DomainError(f"unknown axis {axis!r}")
    c = meta.volume_center()
    span_x = meta.nx * meta.sx / 2.0
    span_y = meta.ny * meta.sy / 2.0
    if meta.nz > 1:
        span_z = (meta.z_table[-1] - meta.z_table[0]
                  + (meta.z_table[-1] - meta.z_table[0]) / (meta.nz - 1)) / 2.0
    else:
        span_z = 0.5
    if axis == "axial":
        if position is None:
            position = float(meta.z_table[meta.nz // 2])
        return PlaneSlicer(center=[c[0], c[1], position],
                           u=[1, 0, 0], v=[0, 1, 0],
                           hu=span_x, hv=span_y,
                           width=meta.nx, height=meta.ny)
    if axis == "coronal":
        if position is None:
            position = float(c[1])
        return PlaneSlicer(center=[c[0], position, c[2]],
                           u=[1, 0, 0], v=[0, 0, 1],
                           hu=span_x, hv=span_z,
                           width=meta.nx, height=meta.nz)
    if position is None:
        position = float(c[0])
    return PlaneSlicer(center=[position, c[1], c[2]],
                       u=[0, 1, 0], v=[0, 0, 1],
                       hu=span_y, hv=span_z,
                       width=meta.ny, height=meta.nz)


@dataclass
class SessionState:
    """Interactive state owned by one client session."""
    plane: PlaneSlicer
    box: "object"
    mode: str = "plane"          # plane | box
    visible: frozenset[int] = frozenset()
    highlights: frozenset[int] = frozenset()
    highlight_color: tuple[int, int, int] = (255, 64, 64)
    highlight_alpha: float = 0.6
    context_dim: float = 0.55
    seq: int = 0

    @classmethod
    def default(cls, meta: VolumeMeta, seq: int = 0) -> "SessionState":
        from .slicer import BoxSlicer
        c = meta.volume_center()
        ext = np.maximum([meta.nx * meta.sx / 4.0, meta.ny * meta.sy / 4.0,
                          max((meta.z_table[-1] - meta.z_table[0]) / 4.0, 0.5)],
                         1e-3)
        return cls(plane=default_plane(meta),
                   box=BoxSlicer(center=c, basis=np.eye(3), extents=ext),
                   visible=frozenset(p.label_id for p in meta.palette),
                   seq=seq)


def apply_command(cmd: CommandAst, session: SessionState, meta: VolumeMeta,
                  synonyms: SynonymTable | None = None,
                  ) -> tuple[SessionState, str, bool]:
    """Apply one parsed command. Returns (session, message, state_changed)."""
    if isinstance(cmd, (Show, Hide, Highlight)) or (
            isinstance(cmd, Unhighlight) and cmd.name is not None):
        lid = resolve_structure(cmd.name, meta.palette, synonyms)
        if lid is None:
            return session, f"unknown structure: {cmd.name}", False
        by_id = meta.palette_by_id()
        disp = by_id[lid].name if lid in by_id else cmd.name
        if isinstance(cmd, Show):
            return (replace(session, visible=session.visible | {lid}),
                    f"showing {disp}", True)
        if isinstance(cmd, Hide):
            return (replace(session, visible=session.visible - {lid}),
                    f"hiding {disp}", True)
        if isinstance(cmd, Highlight):
            return (replace(session, highlights=session.highlights | {lid}),
                    f"highlighting {disp}", True)
        return (replace(session, highlights=session.highlights - {lid}),
                f"unhighlighting {disp}", True)

    if isinstance(cmd, Unhighlight):     # "unhighlight all"
        return (replace(session, highlights=frozenset()),
                "cleared highlights", True)

    if isinstance(cmd, SlicePreset):
        if not math.isfinite(cmd.position):
            raise DomainError("slice position must be finite")
        plane = default_plane(meta, cmd.axis, cmd.position)
        return (replace(session, plane=plane, mode="plane"),
                f"slicing {cmd.axis} at {cmd.position:g} mm", True)

    if isinstance(cmd, MovePlane):
        if not math.isfinite(cmd.offset):
            raise DomainError("move offset must be finite")
        p = session.plane
        moved = PlaneSlicer(center=p.center + cmd.offset * p.normal,
                            u=p.u, v=p.v, hu=p.hu, hv=p.hv,
                            width=p.width, height=p.height)
        return (replace(session, plane=moved),
                f"moved slice {cmd.offset:g} mm", True)

    if isinstance(cmd, Reset):
        return (SessionState.default(meta, seq=session.seq),
                "session reset", True)

    if isinstance(cmd, ListStructures):
        names = ", ".join(p.name for p in meta.palette) or "(none)"
        return session, names, False

    raise TypeError(f"not a command: {cmd!r}")
