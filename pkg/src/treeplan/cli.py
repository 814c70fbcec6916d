"""Command-line entry point: embed / views / path / eval / serve.

All randomness flows from a single --seed, so reruns with identical flags
write byte-identical JSON. Worker parallelism is capped by the
TREEPLAN_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import pipeline
from .embedding import EnergyWeights, SolveConfig, solution_to_json
from .evaluation import format_table, report_to_json
from .navigation import PathConfig, build_path, path_to_csv, path_to_json
from .skeleton import SkeletonParseError
from .svgout import render_svg
from .viewpoint import DegenerateViewError, ViewSearchConfig, views_to_json


def apply_thread_cap() -> None:
    cap = os.environ.get("TREEPLAN_THREADS")
    if not cap:
        return
    try:
        import numba
        numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
    except (ValueError, ImportError):
        pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="skeleton file (SWC or JSON)")
    p.add_argument("--format", choices=["swc", "json"],
                   help="input format; default inferred from the extension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=1.5,
                   help="camera distance factor over the subtree radius")
    p.add_argument("--view-particles", type=int, default=256)
    p.add_argument("--view-iterations", type=int, default=60)
    p.add_argument("--out-dir", default=".", help="output directory")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--particles", type=int, default=40960)
    p.add_argument("--cmax", type=int, default=100)
    p.add_argument("--wl", type=float, default=2.0)
    p.add_argument("--wa", type=float, default=2.0)
    p.add_argument("--wx", default="auto",
                   help='crossing penalty weight, or "auto" (1.5x the max quadratic loss)')
    p.add_argument("--omega-g", type=float, default=0.05)
    p.add_argument("--omega-p", type=float, default=0.05)
    p.add_argument("--omega-inert", type=float, default=0.0375)
    p.add_argument("--dump-targets", action="store_true",
                   help="also write targets.json for debugging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeplan",
        description="Planar embedding, camera views, and exploration paths "
                    "for treelike skeletons")
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="full pipeline: embedding + SVG + loss report")
    _add_common(p_embed)
    _add_solver(p_embed)
    p_embed.add_argument("--svg-scale", type=float, default=40.0)

    p_views = sub.add_parser("views", help="hierarchical optimal viewpoints")
    _add_common(p_views)

    p_path = sub.add_parser("path", help="3D exploration camera path")
    _add_common(p_path)
    p_path.add_argument("--sample-rate", type=float, default=30.0)
    p_path.add_argument("--dolly-duration", type=float, default=3.0)
    p_path.add_argument("--csv", action="store_true", help="also write path.csv")

    p_eval = sub.add_parser("eval", help="loss report for an existing embedding.json")
    _add_common(p_eval)
    p_eval.add_argument("--embedding", required=True, help="embedding.json to score")

    p_serve = sub.add_parser("serve", help="interactive editing service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8157)
    p_serve.add_argument("--cors-origin", default="*")
    p_serve.add_argument("--edit-particles", type=int, default=4096)
    return parser


def _weights(args) -> EnergyWeights:
    wx = args.wx if args.wx == "auto" else float(args.wx)
    return EnergyWeights(w_l=args.wl, w_a=args.wa, w_x=wx)


def _solve_config(args) -> SolveConfig:
    return SolveConfig(particles=args.particles, c_max=args.cmax,
                       omega_g=args.omega_g, omega_p=args.omega_p,
                       omega_inert=args.omega_inert, seed=args.seed)


def _view_config(args) -> ViewSearchConfig:
    return ViewSearchConfig(particles=args.view_particles,
                            iterations=args.view_iterations,
                            beta=args.beta, seed=args.seed)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_embed(args) -> int:
    tree = pipeline.load_tree(Path(args.input), args.format)
    state = pipeline.prepare(tree, _view_config(args))
    solution = pipeline.solve_embedding(state, _weights(args), _solve_config(args))
    rep = pipeline.loss_report(state, solution)
    out = Path(args.out_dir)
    _write(out / "embedding.json", _dump_json(solution_to_json(solution)))
    _write(out / "embedding.svg",
           render_svg(solution, tree, state.hierarchy, scale=args.svg_scale))
    _write(out / "report.json", report_to_json(rep))
    if args.dump_targets:
        _write(out / "targets.json", _dump_json(state.targets.to_json()))
    sys.stdout.write(format_table(rep))
    return 0 if rep.crossings == 0 else 2


def cmd_views(args) -> int:
    tree = pipeline.load_tree(Path(args.input), args.format)
    state = pipeline.prepare(tree, _view_config(args))
    _write(Path(args.out_dir) / "views.json", _dump_json(views_to_json(state.views)))
    return 0


def cmd_path(args) -> int:
    tree = pipeline.load_tree(Path(args.input), args.format)
    state = pipeline.prepare(tree, _view_config(args))
    path = build_path(state.views, PathConfig(sample_rate=args.sample_rate,
                                              dolly_duration=args.dolly_duration))
    out = Path(args.out_dir)
    _write(out / "path.json", _dump_json(path_to_json(path)))
    if args.csv:
        _write(out / "path.csv", path_to_csv(path))
    return 0


EMBEDDING_SCHEMA = {"uv": dict, "ratios": list, "energy": (int, float),
                    "crossings": int, "iterations": int, "seed": int}


def validate_embedding_json(doc) -> dict:
    if not isinstance(doc, dict):
        raise ValueError("embedding JSON must be an object")
    for key, typ in EMBEDDING_SCHEMA.items():
        if key not in doc:
            raise ValueError(f"embedding JSON missing key {key!r}")
        if not isinstance(doc[key], typ):
            raise ValueError(f"embedding JSON key {key!r} has wrong type")
    for nid, uv in doc["uv"].items():
        if not (isinstance(uv, list) and len(uv) == 2
                and all(isinstance(v, (int, float)) for v in uv)):
            raise ValueError(f"embedding JSON uv[{nid!r}] must be [u, v]")
    for pair in doc["ratios"]:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ValueError("embedding JSON ratios entries must be [r_l, r_a]")
    return doc


def cmd_eval(args) -> int:
    tree = pipeline.load_tree(Path(args.input), args.format)
    state = pipeline.prepare(tree, _view_config(args))
    doc = validate_embedding_json(json.loads(Path(args.embedding).read_text()))
    solution = pipeline.solution_from_json(doc)
    rep = pipeline.loss_report(state, solution)
    _write(Path(args.out_dir) / "report.json", report_to_json(rep))
    sys.stdout.write(format_table(rep))
    return 0 if rep.crossings == 0 else 2


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(cors_origin=args.cors_origin, edit_particles=args.edit_particles)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    apply_thread_cap()
    args = build_parser().parse_args(argv)
    handlers = {"embed": cmd_embed, "views": cmd_views, "path": cmd_path,
                "eval": cmd_eval, "serve": cmd_serve}
    try:
        return handlers[args.command](args)
    except SkeletonParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DegenerateViewError as exc:
        print(f"error: degenerate view: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
