"""Session-oriented HTTP/WebSocket API for the interactive editor.

Each session owns one skeleton, its view/target preprocessing, the committed
embedding, accumulated pins, and an append-only edit log. Requests across
sessions are independent; within a session at most one solve runs at a time
and mutations are rejected with 409 while it does. Every job's solver seed
derives from the session seed and the job's position in the edit log, so
replaying the log against a fresh session reproduces the embedding exactly.
"""

from __future__ import annotations

import asyncio
import secrets
import threading
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import pipeline
from .embedding import (EmbeddingSolution, EnergyWeights, PinnedSegment,
                        SolveConfig, apply_edit, solution_to_json)
from .evaluation import report_to_json
from .skeleton import SkeletonParseError
from .svgout import subtree_colors
from .viewpoint import ViewSearchConfig


class SessionCreate(BaseModel):
    skeleton: str
    format: str = "swc"
    config: dict = {}


class EditRequest(BaseModel):
    segmentId: int
    anchorNodeId: int
    rotationRadians: float


class WeightsRequest(BaseModel):
    wl: float
    wa: float
    wx: float | str = "auto"


def _job_seed(session_seed: int, job_index: int) -> int:
    return (session_seed * 1_000_003 + job_index + 1) % (2 ** 63)


@dataclass
class Session:
    id: str
    skeleton_text: str
    skeleton_format: str
    seed: int
    particles: int
    edit_particles: int
    c_max: int
    view_config: ViewSearchConfig
    weights: EnergyWeights
    state: Optional[pipeline.PipelineState] = None
    solution: Optional[EmbeddingSolution] = None
    pinned: dict[int, PinnedSegment] = field(default_factory=dict)
    edit_log: list[dict] = field(default_factory=list)
    progress: list[tuple[int, float]] = field(default_factory=list)
    solve_state: str = "idle"  # idle | running | done | error
    version: int = 0
    error: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)


def session_config(body: SessionCreate, edit_particles_default: int) -> Session:
    cfg = body.config or {}
    seed = int(cfg.get("seed", 0))
    view_config = ViewSearchConfig(
        particles=int(cfg.get("viewParticles", 256)),
        iterations=int(cfg.get("viewIterations", 60)),
        beta=float(cfg.get("beta", 1.5)), seed=seed)
    wx = cfg.get("wx", "auto")
    weights = EnergyWeights(w_l=float(cfg.get("wl", 2.0)),
                            w_a=float(cfg.get("wa", 2.0)),
                            w_x=wx if wx == "auto" else float(wx))
    return Session(
        id=secrets.token_hex(8), skeleton_text=body.skeleton,
        skeleton_format=body.format, seed=seed,
        particles=int(cfg.get("particles", 40960)),
        edit_particles=int(cfg.get("editParticles", edit_particles_default)),
        c_max=int(cfg.get("cmax", 100)),
        view_config=view_config, weights=weights)


def create_app(cors_origin: str = "*", edit_particles: int = 4096) -> FastAPI:
    app = FastAPI(title="treeplan service")
    app.add_middleware(
        CORSMiddleware, allow_origins=[cors_origin], allow_methods=["*"],
        allow_headers=["*"])
    sessions: dict[str, Session] = {}

    def get_session(sid: str) -> Session:
        try:
            return sessions[sid]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session") from None

    def start_job(session: Session, runner) -> None:
        """Transition to running and spawn the solver thread; caller holds
        no lock."""
        with session.lock:
            if session.solve_state == "running":
                raise HTTPException(status_code=409, detail="solve in progress")
            session.solve_state = "running"
            session.progress = []

        def body():
            try:
                solution = runner()
                with session.lock:
                    session.solution = solution
                    session.version += 1
                    session.solve_state = "done"
            except Exception as exc:  # surfaced via the status endpoint
                with session.lock:
                    session.error = str(exc)
                    session.solve_state = "error"

        threading.Thread(target=body, daemon=True).start()

    def on_progress(session: Session):
        def cb(c: int, energy: float):
            session.progress.append((c, energy))
        return cb

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        try:
            tree = pipeline.parse_text(body.skeleton, body.format)
        except SkeletonParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        session = session_config(body, edit_particles)
        sessions[session.id] = session

        def initial():
            state = pipeline.prepare(tree, session.view_config)
            session.state = state
            cfg = SolveConfig(particles=session.particles, c_max=session.c_max,
                              seed=session.seed)
            return pipeline.solve_embedding(state, session.weights, cfg,
                                            progress=on_progress(session))

        start_job(session, initial)
        return {"sessionId": session.id}

    @app.get("/sessions/{sid}")
    def session_status(sid: str):
        session = get_session(sid)
        with session.lock:
            return {
                "state": session.solve_state,
                "version": session.version,
                "editCount": len(session.edit_log),
                "crossings": None if session.solution is None
                             else session.solution.crossings,
                "error": session.error,
            }

    @app.get("/sessions/{sid}/embedding")
    def session_embedding(sid: str):
        session = get_session(sid)
        with session.lock:
            if session.solution is None:
                raise HTTPException(status_code=409, detail="no committed solution yet")
            return solution_to_json(session.solution)

    @app.get("/sessions/{sid}/skeleton")
    def session_skeleton(sid: str):
        session = get_session(sid)
        if session.state is None:
            raise HTTPException(status_code=409, detail="session still preparing")
        state = session.state
        tree = state.tree
        colors = subtree_colors(tree, state.hierarchy)
        return {
            "rootId": tree.root_id,
            "nodes": [{"id": nid, "pos": [float(v) for v in n.position],
                       "radius": float(n.radius), "parent": n.parent}
                      for nid, n in tree.nodes.items()],
            "segments": [seg.node_ids for seg in state.segments],
            "colors": {str(nid): colors[nid] for nid in tree.nodes},
        }

    @app.get("/sessions/{sid}/report")
    def session_report(sid: str):
        import json as _json
        session = get_session(sid)
        with session.lock:
            if session.solution is None or session.state is None:
                raise HTTPException(status_code=409, detail="no committed solution yet")
            rep = pipeline.loss_report(session.state, session.solution)
            return _json.loads(report_to_json(rep))

    @app.post("/sessions/{sid}/edits")
    def post_edit(sid: str, body: EditRequest):
        session = get_session(sid)
        if session.state is None or session.solution is None:
            raise HTTPException(status_code=409, detail="solve in progress")
        state = session.state
        if not 0 <= body.segmentId < len(state.segments):
            raise HTTPException(status_code=422, detail="unknown segment")
        seg = state.segments[body.segmentId]
        attachment = state.tree.nodes[seg.first].parent
        if body.anchorNodeId not in seg.node_ids and body.anchorNodeId != attachment:
            raise HTTPException(status_code=422, detail="unknown anchor")
        job_index = len(session.edit_log)
        seed = _job_seed(session.seed, job_index)
        entry = {"kind": "edit", "segmentId": body.segmentId,
                 "anchorNodeId": body.anchorNodeId,
                 "rotationRadians": body.rotationRadians, "seed": seed}
        solution = session.solution
        pinned = dict(session.pinned)

        def run():
            cfg = SolveConfig(particles=session.edit_particles,
                              c_max=session.c_max, seed=seed)
            new_solution, pins = apply_edit(
                state.tree, state.segments, state.targets, solution,
                body.segmentId, body.anchorNodeId, body.rotationRadians,
                session.weights, cfg, pinned)
            session.pinned = pins
            return new_solution

        start_job(session, run)
        session.edit_log.append(entry)
        return {"jobId": job_index}

    @app.post("/sessions/{sid}/weights")
    def post_weights(sid: str, body: WeightsRequest):
        session = get_session(sid)
        if session.state is None:
            raise HTTPException(status_code=409, detail="solve in progress")
        state = session.state
        job_index = len(session.edit_log)
        seed = _job_seed(session.seed, job_index)
        wx = body.wx if body.wx == "auto" else float(body.wx)
        weights = EnergyWeights(w_l=body.wl, w_a=body.wa, w_x=wx)
        entry = {"kind": "weights", "wl": body.wl, "wa": body.wa,
                 "wx": body.wx, "seed": seed}
        pinned = dict(session.pinned)

        def run():
            session.weights = weights
            cfg = SolveConfig(particles=session.edit_particles,
                              c_max=session.c_max, seed=seed)
            return pipeline.solve_embedding(state, weights, cfg,
                                            pinned=pinned or None,
                                            progress=on_progress(session))

        start_job(session, run)
        session.edit_log.append(entry)
        return {"jobId": job_index}

    @app.get("/sessions/{sid}/log")
    def session_log(sid: str):
        session = get_session(sid)
        return {"edits": session.edit_log}

    @app.websocket("/sessions/{sid}/progress")
    async def progress_ws(ws: WebSocket, sid: str):
        await ws.accept()
        session = sessions.get(sid)
        if session is None:
            await ws.close(code=4404)
            return
        sent = 0
        try:
            while True:
                entries = session.progress
                while sent < len(entries):
                    c, energy = entries[sent]
                    await ws.send_json({"c": c, "energy": energy})
                    sent += 1
                with session.lock:
                    running = session.solve_state == "running"
                if not running and sent >= len(session.progress):
                    break
                await asyncio.sleep(0.02)
            await ws.close()
        except WebSocketDisconnect:
            pass

    return app
