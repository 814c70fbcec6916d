import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from treeplan.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FAST_CONFIG = {"particles": 128, "cmax": 30, "viewParticles": 64,
               "viewIterations": 12, "editParticles": 128, "seed": 7}


@pytest.fixture()
def client():
    return TestClient(create_app())


def create_session(client, config=None, name="ytree.swc"):
    body = {"skeleton": (FIXTURES / name).read_text(), "format": "swc",
            "config": config or FAST_CONFIG}
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201
    return resp.json()["sessionId"]


def wait_done(client, sid, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"/sessions/{sid}").json()
        if status["state"] in ("done", "error"):
            assert status["state"] == "done", status
            return status
        time.sleep(0.02)
    raise TimeoutError("solve did not finish")


def test_create_session_and_solve(client):
    sid = create_session(client)
    status = wait_done(client, sid)
    assert status["crossings"] == 0
    emb = client.get(f"/sessions/{sid}/embedding").json()
    assert set(emb) == {"uv", "ratios", "energy", "crossings", "iterations", "seed"}
    assert emb["crossings"] == 0


def test_malformed_skeleton_400(client):
    resp = client.post("/sessions", json={
        "skeleton": "1 1 0 0 0 1 -1\n2 1 0 1 0 1 9\n", "format": "swc"})
    assert resp.status_code == 400
    assert "line 2" in resp.json()["detail"]


def test_two_sessions_distinct_ids(client):
    a = create_session(client)
    b = create_session(client)
    assert a != b


def test_unknown_session_404(client):
    assert client.get("/sessions/nope/embedding").status_code == 404
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/edits", json={
        "segmentId": 0, "anchorNodeId": 1, "rotationRadians": 0.0}).status_code == 404


def test_progress_stream_non_increasing(client):
    sid = create_session(client)
    energies = []
    with client.websocket_connect(f"/sessions/{sid}/progress") as ws:
        while True:
            try:
                frame = ws.receive_json()
            except Exception:
                break
            assert set(frame) == {"c", "energy"}
            energies.append(frame["energy"])
    assert energies
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_skeleton_and_report_endpoints(client):
    sid = create_session(client)
    wait_done(client, sid)
    skel = client.get(f"/sessions/{sid}/skeleton").json()
    assert skel["rootId"] == 1
    assert len(skel["nodes"]) == 6
    assert len(skel["segments"]) == 3
    assert set(skel["colors"]) == {str(n["id"]) for n in skel["nodes"]}
    rep = client.get(f"/sessions/{sid}/report").json()
    assert rep["crossings"] == 0


def test_edit_zero_rotation_unchanged(client):
    sid = create_session(client)
    wait_done(client, sid)
    before = client.get(f"/sessions/{sid}/embedding").json()
    resp = client.post(f"/sessions/{sid}/edits", json={
        "segmentId": 1, "anchorNodeId": 4, "rotationRadians": 0.0})
    assert resp.status_code == 200
    wait_done(client, sid)
    after = client.get(f"/sessions/{sid}/embedding").json()
    assert after["uv"] == before["uv"]
    assert after["energy"] == before["energy"]


def test_edit_validation_422(client):
    sid = create_session(client)
    wait_done(client, sid)
    assert client.post(f"/sessions/{sid}/edits", json={
        "segmentId": 99, "anchorNodeId": 1, "rotationRadians": 0.1}).status_code == 422
    assert client.post(f"/sessions/{sid}/edits", json={
        "segmentId": 0, "anchorNodeId": 999, "rotationRadians": 0.1}).status_code == 422


def test_busy_returns_409(client):
    config = dict(FAST_CONFIG, particles=4096, cmax=100, seed=1)
    sid = create_session(client, config, name="bush.swc")
    # the initial solve is still running; an immediate edit must be rejected
    resp = client.post(f"/sessions/{sid}/edits", json={
        "segmentId": 0, "anchorNodeId": 2, "rotationRadians": 0.2})
    assert resp.status_code == 409
    wait_done(client, sid, timeout=240.0)


def test_edit_resolves_crossing_and_replay(client):
    sid = create_session(client)
    wait_done(client, sid)
    # rotate the branch onto its sibling: forces a crossing, which the
    # constrained re-solve must remove (iterations > 0 proves it ran)
    edit = {"segmentId": 1, "anchorNodeId": 3, "rotationRadians": -1.6}
    assert client.post(f"/sessions/{sid}/edits", json=edit).status_code == 200
    status = wait_done(client, sid)
    emb = client.get(f"/sessions/{sid}/embedding").json()
    assert emb["crossings"] == 0
    assert emb["iterations"] > 0
    log = client.get(f"/sessions/{sid}/log").json()["edits"]
    assert len(log) == 1 and log[0]["kind"] == "edit"

    # replaying the logged edits on a fresh session reproduces the embedding
    sid2 = create_session(client)
    wait_done(client, sid2)
    for entry in log:
        assert client.post(f"/sessions/{sid2}/edits", json={
            "segmentId": entry["segmentId"],
            "anchorNodeId": entry["anchorNodeId"],
            "rotationRadians": entry["rotationRadians"]}).status_code == 200
        wait_done(client, sid2)
    emb2 = client.get(f"/sessions/{sid2}/embedding").json()
    assert emb2 == emb


def test_edit_residual_crossing_reported(client):
    # pinning the branch right on top of the trunk leaves a crossing no free
    # segment can resolve; the minimal-crossing layout is still returned
    sid = create_session(client)
    wait_done(client, sid)
    resp = client.post(f"/sessions/{sid}/edits", json={
        "segmentId": 1, "anchorNodeId": 3, "rotationRadians": 2.3})
    assert resp.status_code == 200
    wait_done(client, sid)
    emb = client.get(f"/sessions/{sid}/embedding").json()
    assert emb["crossings"] >= 1
    assert client.get(f"/sessions/{sid}").json()["crossings"] == emb["crossings"]


def test_weights_change_keeps_crossing_free(client):
    sid = create_session(client)
    wait_done(client, sid)
    resp = client.post(f"/sessions/{sid}/weights", json={"wl": 0.5, "wa": 5.0})
    assert resp.status_code == 200
    wait_done(client, sid)
    emb = client.get(f"/sessions/{sid}/embedding").json()
    assert emb["crossings"] == 0
    status = client.get(f"/sessions/{sid}").json()
    assert status["editCount"] == 1


def test_version_monotonic(client):
    sid = create_session(client)
    v1 = wait_done(client, sid)["version"]
    client.post(f"/sessions/{sid}/weights", json={"wl": 1.0, "wa": 1.0})
    v2 = wait_done(client, sid)["version"]
    assert v2 > v1
