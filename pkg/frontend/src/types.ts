/** Wire types of the treeplan service endpoints. */

export interface EmbeddingSnapshot {
  uv: Record<string, [number, number]>;
  ratios: [number, number][];
  energy: number;
  crossings: number;
  iterations: number;
  seed: number;
}

export interface SkeletonNodeInfo {
  id: number;
  pos: [number, number, number];
  radius: number;
  parent: number | null;
}

export interface SkeletonInfo {
  rootId: number;
  nodes: SkeletonNodeInfo[];
  segments: number[][];
  colors: Record<string, string>;
}

export interface MetricLosses {
  L_l: number;
  L_a: number;
  maxL_l: number;
  maxL_a: number;
  avgL_l: number;
  avgL_a: number;
  excluded: number;
}

export interface LossReport {
  metric1: MetricLosses;
  metric2: MetricLosses;
  crossings: number;
  crossingPoints: [number, number][];
  nodeCount: number;
  degenerateTargets: number;
}

export interface SessionStatus {
  state: "idle" | "running" | "done" | "error";
  version: number;
  editCount: number;
  crossings: number | null;
  error: string | null;
}

export interface EditLogEntry {
  kind: "edit" | "weights";
  segmentId?: number;
  anchorNodeId?: number;
  rotationRadians?: number;
  wl?: number;
  wa?: number;
  wx?: number | string;
  seed: number;
}

export interface SessionConfig {
  seed?: number;
  particles?: number;
  cmax?: number;
  wl?: number;
  wa?: number;
  wx?: number | string;
  beta?: number;
  viewParticles?: number;
  viewIterations?: number;
  editParticles?: number;
}
