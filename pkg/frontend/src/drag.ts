/** Drag-to-rotate geometry: a pointer trace around an anchor point becomes a
 * rotation angle. Angles accumulate per sample with shortest-arc wrapping, so
 * sweeps beyond half a turn keep their sign and magnitude. */

export interface Pt {
  x: number;
  y: number;
}

const TWO_PI = 2 * Math.PI;

function wrap(delta: number): number {
  return ((delta + Math.PI) % TWO_PI + TWO_PI) % TWO_PI - Math.PI;
}

/**
 * Swept angle of the trace about the anchor (math convention: positive is
 * counterclockwise for y-up coordinates). Returns null for an empty or
 * zero-length drag, or when a sample sits on the anchor.
 */
export function rotationFromTrace(anchor: Pt, trace: Pt[]): number | null {
  if (trace.length < 2) return null;
  let total = 0;
  let prev: number | null = null;
  for (const pt of trace) {
    const dx = pt.x - anchor.x;
    const dy = pt.y - anchor.y;
    if (Math.hypot(dx, dy) < 1e-9) return null;
    const ang = Math.atan2(dy, dx);
    if (prev !== null) total += wrap(ang - prev);
    prev = ang;
  }
  return total === 0 ? null : total;
}

export interface EditIntent {
  segmentId: number;
  anchorNodeId: number;
  rotationRadians: number;
}

/**
 * Tracks one drag gesture. Coordinates are screen pixels (y down); the
 * resulting rotation is converted to embedding space (y up), which flips the
 * sign. `rotation()` exposes the live value for the client-side preview.
 */
export class DragRotate {
  private trace: Pt[] = [];

  constructor(
    private segmentId: number,
    private anchorNodeId: number,
    private anchorScreen: Pt,
  ) {}

  start(pt: Pt): void {
    this.trace = [pt];
  }

  move(pt: Pt): void {
    if (this.trace.length > 0) this.trace.push(pt);
  }

  rotation(): number | null {
    const swept = rotationFromTrace(this.anchorScreen, this.trace);
    return swept === null ? null : -swept; // screen y-down -> uv y-up
  }

  /** Finish the gesture; null means "do not POST" (zero-length drag). */
  end(pt: Pt | null = null): EditIntent | null {
    if (pt) this.move(pt);
    const rotation = this.rotation();
    this.trace = [];
    if (rotation === null) return null;
    return {
      segmentId: this.segmentId,
      anchorNodeId: this.anchorNodeId,
      rotationRadians: rotation,
    };
  }
}
