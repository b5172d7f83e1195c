/**
 * Bus placement for the network scene.  Documents that ship coordinates are
 * normalized into the viewbox; documents without them get a force-directed
 * layout seeded by bus index, so the picture is identical on every load.
 */

import type { ProblemDocument } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export const VIEW_WIDTH = 640;
export const VIEW_HEIGHT = 400;
const MARGIN = 56;
const ITERATIONS = 250;
const REPULSION = 0.45;
const IDEAL_LENGTH = 1.0;

/** Small deterministic PRNG; good enough for layout jitter. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function forceLayout(doc: ProblemDocument): Point[] {
  const n = doc.buses.length;
  const index = new Map(doc.buses.map((bus, i) => [bus.id, i]));
  const edges: [number, number][] = [];
  for (const [a, b] of doc.branches) {
    const i = index.get(a);
    const j = index.get(b);
    if (i !== undefined && j !== undefined && i !== j) {
      edges.push([i, j]);
    }
  }

  const pos: Point[] = doc.buses.map((_, i) => {
    const rand = mulberry32(0x9e3779b9 ^ (i + 1));
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    return {
      x: Math.cos(angle) + 0.35 * (rand() - 0.5),
      y: Math.sin(angle) + 0.35 * (rand() - 0.5),
    };
  });

  for (let iter = 0; iter < ITERATIONS; iter++) {
    const disp: Point[] = pos.map(() => ({ x: 0, y: 0 }));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = pos[i]!.x - pos[j]!.x;
        const dy = pos[i]!.y - pos[j]!.y;
        const d = Math.max(Math.hypot(dx, dy), 0.01);
        const push = (REPULSION * REPULSION) / d / d;
        disp[i]!.x += dx * push;
        disp[i]!.y += dy * push;
        disp[j]!.x -= dx * push;
        disp[j]!.y -= dy * push;
      }
    }
    for (const [i, j] of edges) {
      const dx = pos[i]!.x - pos[j]!.x;
      const dy = pos[i]!.y - pos[j]!.y;
      const d = Math.max(Math.hypot(dx, dy), 0.01);
      const pull = (d - IDEAL_LENGTH) / d;
      disp[i]!.x -= dx * pull * 0.5;
      disp[i]!.y -= dy * pull * 0.5;
      disp[j]!.x += dx * pull * 0.5;
      disp[j]!.y += dy * pull * 0.5;
    }
    const temp = 0.12 * (1 - iter / ITERATIONS) + 0.002;
    for (let i = 0; i < n; i++) {
      const len = Math.hypot(disp[i]!.x, disp[i]!.y);
      if (len > 0) {
        const step = Math.min(len, temp) / len;
        pos[i]!.x += disp[i]!.x * step;
        pos[i]!.y += disp[i]!.y * step;
      }
    }
  }
  return pos;
}

function normalize(points: Point[]): Point[] {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const innerW = VIEW_WIDTH - 2 * MARGIN;
  const innerH = VIEW_HEIGHT - 2 * MARGIN;
  return points.map((p) => ({
    x: round2(spanX > 0 ? MARGIN + ((p.x - minX) / spanX) * innerW : VIEW_WIDTH / 2),
    y: round2(spanY > 0 ? MARGIN + ((p.y - minY) / spanY) * innerH : VIEW_HEIGHT / 2),
  }));
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

/** Map of bus id to scene position. */
export function layoutPositions(doc: ProblemDocument): Map<number, Point> {
  const hasCoords = doc.buses.length > 0
    && doc.buses.every((bus) => Array.isArray(bus.coord) && bus.coord.length === 2);
  const raw = hasCoords
    ? doc.buses.map((bus) => ({ x: bus.coord![0], y: bus.coord![1] }))
    : forceLayout(doc);
  const placed = normalize(raw);
  return new Map(doc.buses.map((bus, i) => [bus.id, placed[i]!]));
}

/** Pull both endpoints of a segment inward so markers clear the bus circles. */
export function trimSegment(a: Point, b: Point, inset: number): [Point, Point] {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy);
  if (len <= 2 * inset) {
    return [a, b];
  }
  const ux = dx / len;
  const uy = dy / len;
  return [
    { x: round2(a.x + ux * inset), y: round2(a.y + uy * inset) },
    { x: round2(b.x - ux * inset), y: round2(b.y - uy * inset) },
  ];
}
