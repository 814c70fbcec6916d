/** Browser wiring: load a skeleton, render the embedding, drag-rotate
 * segments around their attachment nodes, adjust weights, stream solve
 * progress. Talks only to the documented service endpoints. */

import { ApiError, TreeplanClient } from "./api.js";
import { trailingDebounce } from "./debounce.js";
import { DragRotate } from "./drag.js";
import { buildScene, sceneToSvg, toScreen, VectorScene } from "./scene.js";
import { EditorState } from "./state.js";
import type { SkeletonInfo } from "./types.js";

const WEIGHT_DEBOUNCE_MS = 300;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

class EditorApp {
  private client: TreeplanClient;
  private state = new EditorState();
  private skeleton: SkeletonInfo | null = null;
  private scene: VectorScene | null = null;
  private drag: DragRotate | null = null;
  private ws: WebSocket | null = null;

  private canvas = el<HTMLDivElement>("canvas");
  private statusLine = el<HTMLDivElement>("status");
  private badges = el<HTMLSpanElement>("badges");
  private toast = el<HTMLDivElement>("toast");
  private wlSlider = el<HTMLInputElement>("wl");
  private waSlider = el<HTMLInputElement>("wa");

  private pushWeights = trailingDebounce((wl: number, wa: number) => {
    void this.postWeights(wl, wa);
  }, WEIGHT_DEBOUNCE_MS);

  constructor(baseUrl: string) {
    this.client = new TreeplanClient(baseUrl);
    el<HTMLButtonElement>("load").addEventListener("click", () => void this.load());
    for (const slider of [this.wlSlider, this.waSlider]) {
      slider.addEventListener("input", () => {
        this.pushWeights(Number(this.wlSlider.value), Number(this.waSlider.value));
      });
    }
    this.canvas.addEventListener("pointerdown", (e) => this.onPointerDown(e));
    this.canvas.addEventListener("pointermove", (e) => this.onPointerMove(e));
    window.addEventListener("pointerup", (e) => void this.onPointerUp(e));
  }

  private async load(): Promise<void> {
    const text = el<HTMLTextAreaElement>("skeleton").value;
    const format = text.trimStart().startsWith("{") ? "json" : "swc";
    this.setStatus("creating session...");
    try {
      const sid = await this.client.createSession(text, format, {
        particles: 4096,
        seed: 0,
      });
      this.state = new EditorState();
      this.state.sessionId = sid;
      this.watchProgress(sid);
      await this.refreshWhenDone();
    } catch (err) {
      this.showToast(err instanceof ApiError ? err.message : String(err));
    }
  }

  private watchProgress(sid: string): void {
    this.ws?.close();
    this.ws = this.client.progressSocket(sid);
    this.ws.onmessage = (msg) => {
      const frame = JSON.parse(msg.data as string) as { c: number; energy: number };
      this.state.progress.push(frame);
      this.setStatus(`solving: iteration ${frame.c}, best energy ${frame.energy.toExponential(3)}`);
    };
  }

  private async refreshWhenDone(): Promise<void> {
    const sid = this.state.sessionId;
    if (!sid) return;
    this.state.solving = true;
    const status = await this.client.waitDone(sid);
    this.skeleton = await this.client.skeleton(sid);
    const embedding = await this.client.embedding(sid);
    const report = await this.client.report(sid);
    this.state.commit(embedding, status.version);
    this.state.solving = false;
    this.scene = buildScene(this.skeleton, embedding, report.crossingPoints);
    this.render();
    this.setStatus(
      `done: energy ${embedding.energy.toExponential(3)}, crossings ${report.crossings}, ` +
      `avg angle loss ${report.metric1.avgL_a.toFixed(4)}`);
  }

  private render(): void {
    if (!this.skeleton || !this.state.snapshot || !this.scene) return;
    const shown = { ...this.state.snapshot, uv: this.state.displayedUv(this.skeleton) };
    const markers = this.state.preview ? [] : this.scene.markers;
    const scene = buildScene(this.skeleton, shown, []);
    scene.markers = markers;
    this.scene = scene;
    this.canvas.innerHTML = sceneToSvg(scene);
    this.badges.textContent = String(this.state.editBadges);
  }

  private pointerPt(e: PointerEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private onPointerDown(e: PointerEvent): void {
    if (!this.skeleton || !this.scene || this.state.solving) return;
    const target = e.target as Element;
    const segAttr = target.getAttribute?.("data-segment");
    if (segAttr === null || segAttr === undefined) return;
    const segmentId = Number(segAttr);
    const segment = this.skeleton.segments[segmentId];
    if (!segment) return;
    // anchor = the segment's attachment node (its first node's parent)
    const first = this.skeleton.nodes.find((n) => n.id === segment[0]);
    const anchorNodeId = first?.parent ?? this.skeleton.rootId;
    const anchorUv = this.state.snapshot?.uv[String(anchorNodeId)];
    if (!anchorUv) return;
    const anchorScreen = toScreen(this.scene, anchorUv);
    this.drag = new DragRotate(segmentId, anchorNodeId,
                               { x: anchorScreen[0], y: anchorScreen[1] });
    this.drag.start(this.pointerPt(e));
    this.state.selected = { segmentId, anchorNodeId };
    this.state.beginPreview(segmentId, anchorNodeId);
  }

  private onPointerMove(e: PointerEvent): void {
    if (!this.drag) return;
    this.drag.move(this.pointerPt(e));
    const rotation = this.drag.rotation();
    if (rotation !== null) {
      this.state.updatePreview(rotation);
      this.render();
    }
  }

  private async onPointerUp(e: PointerEvent): Promise<void> {
    if (!this.drag) return;
    const intent = this.drag.end(this.pointerPt(e));
    this.drag = null;
    this.state.clearPreview();
    if (!intent) {
      this.render();
      return;
    }
    const sid = this.state.sessionId;
    if (!sid) return;
    try {
      this.setStatus("solving after edit...");
      await this.client.postEdit(sid, intent.segmentId, intent.anchorNodeId,
                                 intent.rotationRadians);
      this.state.recordEditAccepted();
      await this.refreshWhenDone();
    } catch (err) {
      this.render();
      if (err instanceof ApiError && err.status === 409) {
        this.showToast("solver busy - try the edit again in a moment");
      } else {
        this.showToast(err instanceof ApiError ? err.message : String(err));
      }
    }
  }

  private async postWeights(wl: number, wa: number): Promise<void> {
    const sid = this.state.sessionId;
    if (!sid) return;
    try {
      await this.client.postWeights(sid, wl, wa);
      this.state.recordEditAccepted();
      await this.refreshWhenDone();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.showToast("solver busy - weight change not applied, adjust again");
      } else {
        this.showToast(err instanceof ApiError ? err.message : String(err));
      }
    }
  }

  private setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  private showToast(text: string): void {
    this.toast.textContent = text;
    this.toast.classList.add("visible");
    setTimeout(() => this.toast.classList.remove("visible"), 4000);
  }
}

const params = new URLSearchParams(window.location.search);
new EditorApp(params.get("api") ?? "http://127.0.0.1:8157");
