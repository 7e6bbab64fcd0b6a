// Edge-label overlay geometry: a leader line from the boundary anchor to
// the structure's centroid, plus where to put the text so it stays inside
// the canvas.

import type { AnnotationItem } from "./protocol.js";

export interface LeaderLine {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  text: string;
  textX: number;
  textY: number;
  align: "left" | "right" | "center";
}

const PAD = 4;

/**
 * Layout one annotation in canvas coordinates. frame coordinates are
 * multiplied by zoom (canvas pixels per frame pixel).
 */
export function leaderLine(a: AnnotationItem, frameW: number, frameH: number,
                           zoom = 1): LeaderLine {
  const [ax, ay] = a.anchor;
  const [cx, cy] = a.centroid;
  let align: LeaderLine["align"] = "center";
  let textX = ax * zoom;
  let textY = ay * zoom;
  if (ax === 0) {
    align = "left";
    textX += PAD;
  } else if (ax === frameW) {
    align = "right";
    textX -= PAD;
  } else if (ay === 0) {
    textY += 12;
  } else if (ay === frameH) {
    textY -= PAD;
  }
  return {
    x1: ax * zoom,
    y1: ay * zoom,
    x2: cx * zoom,
    y2: cy * zoom,
    text: a.name,
    textX,
    textY,
    align,
  };
}

export function layoutAnnotations(items: AnnotationItem[], frameW: number,
                                  frameH: number, zoom = 1): LeaderLine[] {
  return items.map((a) => leaderLine(a, frameW, frameH, zoom));
}
