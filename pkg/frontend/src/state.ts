// Viewer state and pure reducers. Everything displayed comes from server
// replies; the client never resamples anatomy on its own.

import { anglesToBasis, basisToAngles } from "./math.js";
import type {
  AnnotationItem,
  FrameMsg,
  HelloReply,
  PaletteEntry,
  ServerMessage,
  SetPlaneMsg,
  Vec3,
} from "./protocol.js";

export interface PlaneControls {
  cx: number;
  cy: number;
  cz: number;
  yaw: number; // degrees
  pitch: number; // degrees
  hu: number;
  hv: number;
  w: number;
  h: number;
}

export interface ViewerState {
  status: "connecting" | "connected" | "disconnected";
  banner: string | null;
  meta: HelloReply | null;
  mode: "plane" | "box";
  controls: PlaneControls;
  lastFrame: FrameMsg | null;
  annotations: AnnotationItem[];
  pickedName: string | null; // null = nothing picked, "" = explicit miss
  selectedStructure: string | null;
  history: string[];
}

export function initialState(): ViewerState {
  return {
    status: "connecting",
    banner: null,
    meta: null,
    mode: "plane",
    controls: {
      cx: 0, cy: 0, cz: 0, yaw: 0, pitch: 90,
      hu: 50, hv: 50, w: 256, h: 256,
    },
    lastFrame: null,
    annotations: [],
    pickedName: null,
    selectedStructure: null,
    history: [],
  };
}

/** Default controls from a hello reply: axial plane through the middle. */
export function controlsFromHello(hello: HelloReply): PlaneControls {
  const cx = hello.origin[0] + ((hello.nx - 1) * hello.sx) / 2;
  const cy = hello.origin[1] + ((hello.ny - 1) * hello.sy) / 2;
  const cz = (hello.z_table[0] + hello.z_table[hello.z_table.length - 1]) / 2;
  return {
    cx, cy, cz,
    yaw: 0,
    pitch: 90,
    hu: (hello.nx * hello.sx) / 2,
    hv: (hello.ny * hello.sy) / 2,
    w: hello.nx,
    h: hello.ny,
  };
}

/** Serialize the control state; the basis is orthonormal by construction. */
export function controlsToSetPlane(c: PlaneControls): SetPlaneMsg {
  const { u, v } = anglesToBasis(c.yaw, c.pitch);
  return {
    type: "set_plane",
    center: [c.cx, c.cy, c.cz] as Vec3,
    u, v,
    hu: c.hu,
    hv: c.hv,
    w: c.w,
    h: c.h,
  };
}

/** Inverse of controlsToSetPlane, used to prove the round-trip invariant. */
export function controlsFromSetPlane(m: SetPlaneMsg): PlaneControls {
  const { yaw, pitch } = basisToAngles(m.u, m.v);
  return {
    cx: m.center[0], cy: m.center[1], cz: m.center[2],
    yaw, pitch, hu: m.hu, hv: m.hv, w: m.w, h: m.h,
  };
}

export function formatScaleBadge(scale: number): string {
  if (scale >= 1) return "full res";
  if (scale === 0.5) return "½ res";
  if (scale === 0.25) return "¼ res";
  return `${scale}x res`;
}

export function structureNames(palette: PaletteEntry[]): string[] {
  return palette.map((p) => p.name);
}

/** Apply one server message; returns a new state object. */
export function reduce(state: ViewerState, msg: ServerMessage): ViewerState {
  switch (msg.type) {
    case "hello":
      return {
        ...state,
        status: "connected",
        banner: null,
        meta: msg,
        controls: controlsFromHello(msg),
      };
    case "frame":
      return { ...state, lastFrame: msg, mode: msg.mode };
    case "annotations":
      return { ...state, annotations: msg.items };
    case "pick_result":
      return { ...state, pickedName: msg.hit ? msg.name ?? "" : "" };
    case "command_result": {
      const line = (msg.ok ? "" : "error: ") + msg.message;
      return { ...state, history: [...state.history, line] };
    }
    case "error":
      return { ...state, banner: msg.reason };
  }
}
