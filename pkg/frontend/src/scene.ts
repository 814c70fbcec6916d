/** Vector scene construction: the embedding as radius-scaled strokes with
 * per-subtree colors plus red crossing markers, and its SVG serialization.
 * Screen y grows downward; the scene records the transform so pointer
 * coordinates can be mapped back to embedding space. */

import type { EmbeddingSnapshot, SkeletonInfo } from "./types.js";

export interface Stroke {
  childId: number;
  parentId: number;
  segment: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  width: number;
  color: string;
}

export interface Marker {
  x: number;
  y: number;
  r: number;
}

export interface VectorScene {
  strokes: Stroke[];
  markers: Marker[];
  width: number;
  height: number;
  scale: number;
  offsetX: number; // screen = (uv.x * scale - offsetX, height - (uv.y * scale - offsetY))
  offsetY: number;
}

export function segmentOfNode(skeleton: SkeletonInfo): Map<number, number> {
  const map = new Map<number, number>();
  skeleton.segments.forEach((ids, index) => {
    for (const id of ids) map.set(id, index);
  });
  return map;
}

export function toScreen(scene: VectorScene, uv: [number, number]): [number, number] {
  return [
    uv[0] * scene.scale - scene.offsetX,
    scene.height - (uv[1] * scene.scale - scene.offsetY),
  ];
}

export function toUv(scene: VectorScene, pt: [number, number]): [number, number] {
  return [
    (pt[0] + scene.offsetX) / scene.scale,
    (scene.height - pt[1] + scene.offsetY) / scene.scale,
  ];
}

export function buildScene(
  skeleton: SkeletonInfo,
  embedding: EmbeddingSnapshot,
  crossingPoints: [number, number][] = [],
  scale = 40,
  margin = 20,
): VectorScene {
  const radii = new Map(skeleton.nodes.map((n) => [n.id, n.radius]));
  const pad = Math.max(...skeleton.nodes.map((n) => n.radius), 0);
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [u, v] of Object.values(embedding.uv)) {
    minX = Math.min(minX, (u - pad) * scale);
    maxX = Math.max(maxX, (u + pad) * scale);
    minY = Math.min(minY, (v - pad) * scale);
    maxY = Math.max(maxY, (v + pad) * scale);
  }
  const scene: VectorScene = {
    strokes: [],
    markers: [],
    width: maxX - minX + 2 * margin,
    height: maxY - minY + 2 * margin,
    scale,
    offsetX: minX - margin,
    offsetY: minY - margin,
  };
  const segOf = segmentOfNode(skeleton);
  for (const node of skeleton.nodes) {
    if (node.parent === null) continue;
    const child = embedding.uv[String(node.id)];
    const parent = embedding.uv[String(node.parent)];
    if (!child || !parent) continue;
    const [x1, y1] = toScreen(scene, parent);
    const [x2, y2] = toScreen(scene, child);
    const width = Math.max(
      2 * Math.max(node.radius, radii.get(node.parent) ?? 0) * scale, 1);
    scene.strokes.push({
      childId: node.id,
      parentId: node.parent,
      segment: segOf.get(node.id) ?? -1,
      x1, y1, x2, y2,
      width,
      color: skeleton.colors[String(node.id)] ?? "#444444",
    });
  }
  for (const pt of crossingPoints) {
    const [x, y] = toScreen(scene, pt);
    scene.markers.push({ x, y, r: Math.max(0.18 * scale, 4) });
  }
  return scene;
}

/** Strokes grouped per segment, in chain order (one polyline per segment). */
export function polylines(scene: VectorScene): Map<number, Stroke[]> {
  const groups = new Map<number, Stroke[]>();
  for (const stroke of scene.strokes) {
    const group = groups.get(stroke.segment);
    if (group) group.push(stroke);
    else groups.set(stroke.segment, [stroke]);
  }
  return groups;
}

export function sceneToSvg(scene: VectorScene): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width.toFixed(1)}" ` +
    `height="${scene.height.toFixed(1)}" viewBox="0 0 ${scene.width.toFixed(1)} ` +
    `${scene.height.toFixed(1)}">`,
  ];
  for (const s of scene.strokes) {
    parts.push(
      `<line data-segment="${s.segment}" data-child="${s.childId}" ` +
      `x1="${s.x1.toFixed(2)}" y1="${s.y1.toFixed(2)}" ` +
      `x2="${s.x2.toFixed(2)}" y2="${s.y2.toFixed(2)}" ` +
      `stroke="${s.color}" stroke-width="${s.width.toFixed(2)}" stroke-linecap="round"/>`);
  }
  for (const m of scene.markers) {
    parts.push(
      `<circle class="crossing" cx="${m.x.toFixed(2)}" cy="${m.y.toFixed(2)}" ` +
      `r="${m.r.toFixed(2)}" fill="#d62728" fill-opacity="0.85"/>`);
  }
  parts.push("</svg>");
  return parts.join("\n");
}
