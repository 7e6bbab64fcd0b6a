"""Streaming session protocol over WebSocket.

Messages are JSON texts; frame images travel as base64 PNG. Each client
message gets exactly one direct reply; frame and annotations messages
additionally flow whenever a probe or visualization state changes. A
session is single-writer: its messages are handled strictly in arrival
order, while the shared volumes stay immutable.
"""

from __future__ import annotations

import base64
import json
import time
from typing import Callable

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .annotate import (HighlightParams, Ray, analyze_slice_labels,
                       annotations_payload, apply_highlight, pick_plane,
                       place_edge_labels, select_key_labels)
from .command import (SessionState, SynonymTable, apply_command,
                      parse_command, ParseError)
from .slicer import (BoxSlicer, FACE_NAMES, FrameBudgetController,
                     PlaneSlicer, SliceImage, render_box_faces,
                     render_plane_slice, slice_to_png_bytes)
from .volume import ColorVolume, DomainError, LabelVolume

MAX_MESSAGE_BYTES = 1 << 20
_REPAIR_TOL = 1e-3


def _orthonormalize(u, v):
    """Gram-Schmidt repair for bases within the protocol tolerance."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DomainError("basis vectors must be nonzero")
    if (abs(nu - 1) > _REPAIR_TOL or abs(nv - 1) > _REPAIR_TOL
            or abs(float(u @ v)) / (nu * nv) > _REPAIR_TOL):
        raise DomainError("basis is not orthonormal within tolerance")
    u = u / nu
    v = v - (v @ u) * u
    return u, v / np.linalg.norm(v)


def _vec3(body, key):
    v = body.get(key)
    if not (isinstance(v, (list, tuple)) and len(v) == 3
            and all(isinstance(x, (int, float)) for x in v)):
        raise DomainError(f"{key} must be a 3-vector")
    return [float(x) for x in v]


class SessionActor:
    """One client session bound to one volume.

    ``cost_fn`` is a test hook: when set, it replaces the measured render
    time (in ms) fed to the frame-budget controller.
    """

    def __init__(self, vol: ColorVolume, lab: LabelVolume | None,
                 synonyms: SynonymTable | None = None,
                 controller: FrameBudgetController | None = None,
                 cost_fn: Callable[[float], float] | None = None):
        self.vol = vol
        self.lab = lab
        self.meta = vol.meta
        self.synonyms = synonyms
        self.controller = controller or FrameBudgetController()
        self.cost_fn = cost_fn
        self.state = SessionState.default(self.meta)
        self.last_plane_slice: SliceImage | None = None

    # -- rendering -------------------------------------------------------

    def _postprocess(self, img: SliceImage) -> SliceImage:
        hidden = ({p.label_id for p in self.meta.palette}
                  - set(self.state.visible))
        if hidden:
            mask = np.isin(img.labels, list(hidden))
            rgba = img.rgba.copy()
            rgba[mask] = 0
            img = SliceImage(rgba, img.labels, img.geometry)
        if self.state.highlights:
            img = apply_highlight(img, HighlightParams(
                selected=self.state.highlights,
                color=self.state.highlight_color,
                alpha=self.state.highlight_alpha,
                dim=self.state.context_dim))
        return img

    def render_frame(self) -> list[dict]:
        """Render per current mode, update the controller, emit
        [frame, annotations] messages."""
        scale = self.controller.scale
        t0 = time.perf_counter()
        if self.state.mode == "plane":
            img = self._postprocess(render_plane_slice(
                self.state.plane, self.vol, self.lab, scale))
            self.last_plane_slice = img
            images = [{"w": img.width, "h": img.height,
                       "png_b64": base64.b64encode(
                           slice_to_png_bytes(img)).decode("ascii")}]
            geometry = img.geometry.to_dict()
            annos = self._annotations(img, scale)
        else:
            faces = [self._postprocess(f) for f in render_box_faces(
                self.state.box, self.vol, self.lab, scale)]
            images = [{"face": name, "w": f.width, "h": f.height,
                       "png_b64": base64.b64encode(
                           slice_to_png_bytes(f)).decode("ascii")}
                      for name, f in zip(FACE_NAMES, faces)]
            geometry = {"faces": [f.geometry.to_dict() for f in faces]}
            annos = []

        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        if self.cost_fn is not None:
            elapsed_ms = self.cost_fn(scale)
        self.controller.update(elapsed_ms)

        self.state.seq += 1
        frame = {"type": "frame", "seq": self.state.seq, "scale": scale,
                 "mode": self.state.mode, "images": images,
                 "geometry": geometry}
        return [frame, {"type": "annotations", "items": annos}]

    def _annotations(self, img: SliceImage, scale: float) -> list[dict]:
        stats = analyze_slice_labels(img.labels)
        names = {p.label_id: p.name for p in self.meta.palette}
        selected = [(lid, names.get(lid, str(lid)), stats.counts[lid],
                     stats.centroids[lid])
                    for lid in select_key_labels(stats)]
        try:
            annos = place_edge_labels(selected, img.width, img.height,
                                      min_sep_px=24.0 * scale)
        except Exception:
            annos = []
        return annotations_payload(annos)

    # -- message handling --------------------------------------------------

    def handle_message(self, msg) -> list[dict]:
        if not isinstance(msg, dict) or "type" not in msg:
            return [{"type": "error", "reason": "message must have a type"}]
        mtype = msg["type"]
        handler = getattr(self, f"_on_{mtype}", None)
        if handler is None:
            return [{"type": "error", "reason": f"unknown message type {mtype!r}"}]
        try:
            return handler(msg)
        except DomainError as e:
            return [{"type": "error", "reason": str(e)}]

    def _on_hello(self, msg) -> list[dict]:
        meta = self.meta
        reply = {"type": "hello",
                 "nx": meta.nx, "ny": meta.ny, "nz": meta.nz,
                 "sx": meta.sx, "sy": meta.sy,
                 "z_table": [float(z) for z in meta.z_table],
                 "origin": [float(x) for x in meta.origin],
                 "palette": [{"id": p.label_id, "name": p.name,
                              "color": list(p.color)} for p in meta.palette]}
        return [reply] + self.render_frame()

    def _on_set_plane(self, msg) -> list[dict]:
        u, v = _orthonormalize(_vec3(msg, "u"), _vec3(msg, "v"))
        plane = PlaneSlicer(center=_vec3(msg, "center"), u=u, v=v,
                            hu=float(msg["hu"]), hv=float(msg["hv"]),
                            width=int(msg.get("w", 256)),
                            height=int(msg.get("h", 256)))
        self.state.plane = plane
        self.state.mode = "plane"
        return self.render_frame()

    def _on_set_box(self, msg) -> list[dict]:
        basis = np.asarray(msg["basis"], dtype=np.float64)
        if basis.shape != (9,):
            raise DomainError("basis must be 9 values, row-major")
        basis = basis.reshape(3, 3)
        r0, r1 = _orthonormalize(basis[0], basis[1])
        r2 = np.cross(r0, r1)
        if float(r2 @ basis[2]) < 0:
            raise DomainError("basis must be right-handed within tolerance")
        box = BoxSlicer(center=_vec3(msg, "center"),
                        basis=np.stack([r0, r1, r2]),
                        extents=[float(x) for x in msg["extents"]],
                        face_res=int(msg.get("face_res", 256)))
        self.state.box = box
        self.state.mode = "box"
        return self.render_frame()

    def _on_set_mode(self, msg) -> list[dict]:
        mode = msg.get("mode")
        if mode not in ("plane", "box"):
            raise DomainError("mode must be 'plane' or 'box'")
        self.state.mode = mode
        return self.render_frame()

    def _on_pick(self, msg) -> list[dict]:
        ray = Ray(_vec3(msg, "origin"), _vec3(msg, "dir"))
        if self.last_plane_slice is None or self.state.mode != "plane":
            return [{"type": "pick_result", "hit": False}]
        names = {p.label_id: p.name for p in self.meta.palette}
        res = pick_plane(ray, self.state.plane, self.last_plane_slice, names)
        if res is None:
            return [{"type": "pick_result", "hit": False}]
        return [{"type": "pick_result", "hit": True,
                 "world": [float(x) for x in res.world],
                 "pixel": [res.pixel[0], res.pixel[1]],
                 "id": res.label_id, "name": res.name}]

    def _on_command(self, msg) -> list[dict]:
        text = msg.get("text")
        if not isinstance(text, str):
            raise DomainError("command text must be a string")
        ast = parse_command(text)
        if isinstance(ast, ParseError):
            message = (f"parse error at token {ast.position}: expected "
                       f"{ast.expected}, found {ast.found or 'end of input'}")
            return [{"type": "command_result", "ok": False, "message": message}]
        new_state, message, changed = apply_command(
            ast, self.state, self.meta, self.synonyms)
        self.state = new_state
        replies = [{"type": "command_result", "ok": True, "message": message}]
        if changed:
            replies += self.render_frame()
        return replies


def create_app(volumes: dict[str, tuple[ColorVolume, LabelVolume | None]],
               cost_fn: Callable[[float], float] | None = None):
    """FastAPI app exposing GET /volumes and the /session WebSocket."""
    app = FastAPI(title="voxslice")

    @app.get("/volumes")
    def list_volumes():
        return {"volumes": sorted(volumes)}

    @app.websocket("/session")
    async def session(ws: WebSocket):
        await ws.accept()
        actor: SessionActor | None = None
        try:
            while True:
                text = await ws.receive_text()
                if len(text.encode("utf-8")) > MAX_MESSAGE_BYTES:
                    await ws.send_json({"type": "error",
                                        "reason": "message exceeds 1 MiB"})
                    continue
                try:
                    msg = json.loads(text)
                except ValueError:
                    await ws.send_json({"type": "error",
                                        "reason": "invalid JSON"})
                    continue
                if actor is None:
                    if not (isinstance(msg, dict)
                            and msg.get("type") == "hello"):
                        await ws.send_json({"type": "error",
                                            "reason": "expected hello first"})
                        continue
                    vid = msg.get("volume")
                    if vid not in volumes:
                        await ws.send_json({"type": "error",
                                            "reason": f"unknown volume {vid!r}"})
                        continue
                    vol, lab = volumes[vid]
                    actor = SessionActor(vol, lab, cost_fn=cost_fn)
                for reply in actor.handle_message(msg):
                    await ws.send_json(reply)
        except WebSocketDisconnect:
            pass

    return app
