/** Editor state: the last server-committed embedding plus at most one local
 * preview rotation. Snapshot versions only move forward, so a late response
 * can never replace a newer solution. */

import type { EmbeddingSnapshot, SkeletonInfo } from "./types.js";

export interface Preview {
  segmentId: number;
  anchorNodeId: number;
  rotation: number;
}

export class EditorState {
  sessionId: string | null = null;
  version = -1;
  snapshot: EmbeddingSnapshot | null = null;
  selected: { segmentId: number; anchorNodeId: number } | null = null;
  preview: Preview | null = null;
  editBadges = 0;
  solving = false;
  progress: { c: number; energy: number }[] = [];

  /** Accept a server snapshot only if it is newer than the displayed one. */
  commit(snapshot: EmbeddingSnapshot, version: number): boolean {
    if (version <= this.version) return false;
    this.snapshot = snapshot;
    this.version = version;
    this.preview = null;
    return true;
  }

  beginPreview(segmentId: number, anchorNodeId: number): void {
    this.preview = { segmentId, anchorNodeId, rotation: 0 };
  }

  updatePreview(rotation: number): void {
    if (this.preview) this.preview.rotation = rotation;
  }

  clearPreview(): void {
    this.preview = null;
  }

  /** Edit accepted by the server: one more history badge. */
  recordEditAccepted(): void {
    this.editBadges += 1;
  }

  /**
   * Coordinates to draw: the committed embedding with the pending preview
   * rotation (segment plus its descendants, about the anchor) applied
   * client-side.
   */
  displayedUv(skeleton: SkeletonInfo): Record<string, [number, number]> {
    if (!this.snapshot) return {};
    if (!this.preview || this.preview.rotation === 0) return this.snapshot.uv;
    const { segmentId, anchorNodeId, rotation } = this.preview;
    const moved = movedNodeIds(skeleton, segmentId);
    const anchor = this.snapshot.uv[String(anchorNodeId)];
    if (!anchor) return this.snapshot.uv;
    const c = Math.cos(rotation);
    const s = Math.sin(rotation);
    const out: Record<string, [number, number]> = {};
    for (const [key, uv] of Object.entries(this.snapshot.uv)) {
      if (moved.has(Number(key))) {
        const dx = uv[0] - anchor[0];
        const dy = uv[1] - anchor[1];
        out[key] = [anchor[0] + c * dx - s * dy, anchor[1] + s * dx + c * dy];
      } else {
        out[key] = uv;
      }
    }
    return out;
  }
}

/** The segment's nodes plus every descendant below its first node. */
export function movedNodeIds(skeleton: SkeletonInfo, segmentId: number): Set<number> {
  const segment = skeleton.segments[segmentId] ?? [];
  const children = new Map<number, number[]>();
  for (const node of skeleton.nodes) {
    if (node.parent === null) continue;
    const list = children.get(node.parent);
    if (list) list.push(node.id);
    else children.set(node.parent, [node.id]);
  }
  const moved = new Set<number>();
  const stack = segment.length > 0 ? [segment[0]] : [];
  while (stack.length > 0) {
    const id = stack.pop()!;
    if (moved.has(id)) continue;
    moved.add(id);
    for (const child of children.get(id) ?? []) stack.push(child);
  }
  return moved;
}
