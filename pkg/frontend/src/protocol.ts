// Message shapes for the /session WebSocket protocol. The server is the
// source of truth; this module only validates enough structure to keep the
// UI from dereferencing garbage.

export type Vec3 = [number, number, number];

export interface PaletteEntry {
  id: number;
  name: string;
  color: [number, number, number];
}

export interface HelloReply {
  type: "hello";
  nx: number;
  ny: number;
  nz: number;
  sx: number;
  sy: number;
  z_table: number[];
  origin: Vec3;
  palette: PaletteEntry[];
}

export interface PlaneGeometry {
  center: Vec3;
  u: Vec3;
  v: Vec3;
  hu: number;
  hv: number;
  scale: number;
}

export interface FrameImage {
  face?: string;
  w: number;
  h: number;
  png_b64: string;
}

export interface FrameMsg {
  type: "frame";
  seq: number;
  scale: number;
  mode: "plane" | "box";
  images: FrameImage[];
  geometry: PlaneGeometry | { faces: PlaneGeometry[] };
}

export interface AnnotationItem {
  id: number;
  name: string;
  count: number;
  anchor: [number, number];
  centroid: [number, number];
}

export interface AnnotationsMsg {
  type: "annotations";
  items: AnnotationItem[];
}

export interface PickResultMsg {
  type: "pick_result";
  hit: boolean;
  world?: Vec3;
  pixel?: [number, number];
  id?: number;
  name?: string;
}

export interface CommandResultMsg {
  type: "command_result";
  ok: boolean;
  message: string;
}

export interface ErrorMsg {
  type: "error";
  reason: string;
}

export type ServerMessage =
  | HelloReply
  | FrameMsg
  | AnnotationsMsg
  | PickResultMsg
  | CommandResultMsg
  | ErrorMsg;

export interface SetPlaneMsg {
  type: "set_plane";
  center: Vec3;
  u: Vec3;
  v: Vec3;
  hu: number;
  hv: number;
  w: number;
  h: number;
}

export interface SetBoxMsg {
  type: "set_box";
  center: Vec3;
  basis: number[]; // 9 values, row-major
  extents: Vec3;
  face_res: number;
}

export interface PickMsg {
  type: "pick";
  origin: Vec3;
  dir: Vec3;
}

export interface CommandMsg {
  type: "command";
  text: string;
}

export interface HelloMsg {
  type: "hello";
  volume: string;
}

export type ClientMessage =
  | HelloMsg
  | SetPlaneMsg
  | SetBoxMsg
  | PickMsg
  | CommandMsg
  | { type: "set_mode"; mode: "plane" | "box" };

const SERVER_TYPES = new Set([
  "hello",
  "frame",
  "annotations",
  "pick_result",
  "command_result",
  "error",
]);

export class ProtocolError extends Error {}

export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("reply is not JSON");
  }
  if (typeof raw !== "object" || raw === null) {
    throw new ProtocolError("reply is not an object");
  }
  const msg = raw as Record<string, unknown>;
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    throw new ProtocolError(`unexpected reply type ${String(msg.type)}`);
  }
  switch (msg.type) {
    case "frame":
      if (!Array.isArray(msg.images) || typeof msg.seq !== "number") {
        throw new ProtocolError("malformed frame");
      }
      break;
    case "annotations":
      if (!Array.isArray(msg.items)) {
        throw new ProtocolError("malformed annotations");
      }
      break;
    case "error":
      if (typeof msg.reason !== "string") {
        throw new ProtocolError("malformed error");
      }
      break;
  }
  return msg as unknown as ServerMessage;
}
