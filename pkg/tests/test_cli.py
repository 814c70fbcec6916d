import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from treeplan.cli import build_parser, main, validate_embedding_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FAST = ["--view-particles", "64", "--view-iterations", "12",
        "--particles", "128", "--cmax", "30"]


def run_embed(tmp_path, *extra):
    args = ["embed", "--input", str(FIXTURES / "ytree.swc"),
            "--out-dir", str(tmp_path), *FAST, *extra]
    return main(args)


def test_embed_y_tree_writes_outputs(tmp_path):
    code = run_embed(tmp_path)
    assert code == 0
    emb = json.loads((tmp_path / "embedding.json").read_text())
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(emb) == {"uv", "ratios", "energy", "crossings", "iterations", "seed"}
    assert rep["crossings"] == 0
    assert emb["crossings"] == 0
    assert (tmp_path / "embedding.svg").exists()


def test_embed_seed_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_embed(a, "--seed", "42") == 0
    assert run_embed(b, "--seed", "42") == 0
    assert (a / "embedding.json").read_bytes() == (b / "embedding.json").read_bytes()


def test_embed_svg_valid_xml_stroke_per_edge(tmp_path):
    run_embed(tmp_path)
    root = ET.parse(tmp_path / "embedding.svg").getroot()
    strokes = [el for el in root.iter() if el.tag.endswith("line")]
    assert len(strokes) == 5  # 6 nodes -> 5 edges


def test_embed_json_input_and_dump_targets(tmp_path):
    code = main(["embed", "--input", str(FIXTURES / "ytree.json"),
                 "--format", "json", "--out-dir", str(tmp_path),
                 "--dump-targets", *FAST])
    assert code == 0
    targets = json.loads((tmp_path / "targets.json").read_text())
    assert set(targets) == {"perNode", "perNode3D", "degenerate"}
    assert len(targets["perNode"]) == 5  # every non-root node


def test_default_flags_match_published_settings():
    args = build_parser().parse_args(["embed", "--input", "x.swc"])
    assert args.wl == 2.0 and args.wa == 2.0
    assert args.particles == 40960 and args.cmax == 100
    assert args.omega_g == 0.05 and args.omega_p == 0.05
    assert args.omega_inert == 0.0375
    assert args.beta == 1.5
    assert args.seed == 0


def test_views_command(tmp_path):
    code = main(["views", "--input", str(FIXTURES / "ytree.swc"),
                 "--out-dir", str(tmp_path),
                 "--view-particles", "64", "--view-iterations", "12"])
    assert code == 0
    doc = json.loads((tmp_path / "views.json").read_text())
    assert len(doc["views"]) == 3  # global + two subtrees


def test_views_path_tree_single_view(tmp_path):
    swc = tmp_path / "chain.swc"
    swc.write_text("1 1 0 0 0 0.1 -1\n2 1 0 1 0 0.1 1\n3 1 0 2 0.4 0.1 2\n")
    code = main(["views", "--input", str(swc), "--out-dir", str(tmp_path),
                 "--view-particles", "48", "--view-iterations", "10"])
    assert code == 0
    assert len(json.loads((tmp_path / "views.json").read_text())["views"]) == 1


def test_path_command_phases(tmp_path):
    code = main(["path", "--input", str(FIXTURES / "ytree.swc"),
                 "--out-dir", str(tmp_path), "--sample-rate", "10",
                 "--view-particles", "64", "--view-iterations", "12", "--csv"])
    assert code == 0
    doc = json.loads((tmp_path / "path.json").read_text())
    phases = [doc["keyframes"][0]["phase"]]
    for k in doc["keyframes"][1:]:
        if k["phase"] != phases[-1]:
            phases.append(k["phase"])
    assert phases == ["dolly", "transition", "dolly", "transition", "dolly"]
    assert (tmp_path / "path.csv").exists()


def test_eval_command_identity_zero(tmp_path):
    assert run_embed(tmp_path) == 0
    code = main(["eval", "--input", str(FIXTURES / "ytree.swc"),
                 "--embedding", str(tmp_path / "embedding.json"),
                 "--out-dir", str(tmp_path / "eval"),
                 "--view-particles", "64", "--view-iterations", "12"])
    assert code == 0
    rep = json.loads((tmp_path / "eval" / "report.json").read_text())
    assert rep["metric1"]["L_l"] <= 1e-9
    assert rep["metric1"]["L_a"] <= 1e-9


def test_eval_rejects_bad_schema(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"uv": {}, "ratios": []}))
    code = main(["eval", "--input", str(FIXTURES / "ytree.swc"),
                 "--embedding", str(bad), "--out-dir", str(tmp_path)])
    assert code == 1
    with pytest.raises(ValueError, match="missing key"):
        validate_embedding_json({"uv": {}, "ratios": []})


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.swc"
    bad.write_text("1 1 0 0 0 1 -1\n2 1 0 1 0 1 9\n")
    code = main(["embed", "--input", str(bad), "--out-dir", str(tmp_path), *FAST])
    assert code == 1
