"""HTTP/WebSocket gateway: scenario CRUD, simulation lifecycle, streaming."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from metis.gateway import create_app
from metis.nets import NetworkConfig
from metis.rewards import RewardConfig
from metis.trainer import TrainerConfig, init_trainer, save_checkpoint
from metis.world import canonicalize, load_sample, sample_bytes

SHORT_RUN = {"scenario_id": "one_room", "seed": 3, "speed": 0,
             "end_conditions": ["time_limit:5"]}


@pytest.fixture()
def client(tmp_path):
    with TestClient(create_app(tmp_path)) as c:
        c.data_dir = tmp_path
        yield c


def wait_ended(client, sim_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/simulations/{sim_id}/results").json()
        if body["status"] == "ended":
            return body
        time.sleep(0.02)
    raise AssertionError("simulation did not end in time")


def read_log(client, sim_id):
    path = client.data_dir / "logs" / f"{sim_id}.ndjson"
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["version"]


# -- scenario CRUD ------------------------------------------------------------

def test_samples_are_preseeded_and_canonical(client):
    ids = {s["id"] for s in client.get("/scenarios").json()}
    assert {"small_room", "one_room", "training_building",
            "case_study"} <= ids
    raw = client.get("/scenarios/one_room").content
    assert raw == canonicalize(raw)
    assert client.get("/scenarios/one_room").content == raw


def test_create_get_round_trip(client):
    doc = json.loads(sample_bytes("small_room"))
    doc["id"] = "my_copy"
    posted = json.dumps(doc).encode()
    r = client.post("/scenarios", content=posted)
    assert r.status_code == 201 and r.json() == {"id": "my_copy"}
    assert client.get("/scenarios/my_copy").content == canonicalize(posted)

    assert client.post("/scenarios", content=posted).status_code == 409
    assert client.post("/scenarios", content=b"{nope").status_code == 400
    r = client.post("/scenarios", content=b'{"version": 99}')
    assert r.status_code == 400 and "version" in r.json()["error"]


def test_put_uses_path_id_and_updates(client):
    doc = json.loads(sample_bytes("small_room"))
    doc["id"] = "something_else"
    doc["name"] = "Renamed"
    r = client.put("/scenarios/renamed_room", content=json.dumps(doc).encode())
    assert r.status_code == 200 and r.json() == {"id": "renamed_room"}
    stored = json.loads(client.get("/scenarios/renamed_room").content)
    assert stored["id"] == "renamed_room"
    assert stored["name"] == "Renamed"
    assert client.put("/scenarios/renamed_room", content=b"[]").status_code == 400
    assert client.put("/scenarios/bad id!", content=b"{}").status_code == 400


def test_delete(client):
    doc = sample_bytes("small_room")
    client.put("/scenarios/doomed", content=doc)
    assert client.delete("/scenarios/doomed").status_code == 204
    assert client.get("/scenarios/doomed").status_code == 404
    assert client.delete("/scenarios/doomed").status_code == 404


def test_validate_endpoint(client):
    r = client.post("/scenarios/one_room/validate")
    assert r.status_code == 200 and r.json() == {"issues": []}

    doc = json.loads(sample_bytes("small_room"))
    doc["id"] = "no_exit"
    for d in doc["doors"]:
        d["exit"] = False
    client.post("/scenarios", content=json.dumps(doc).encode())
    issues = client.post("/scenarios/no_exit/validate").json()["issues"]
    assert "MissingExit" in [i["code"] for i in issues]

    assert client.post("/scenarios/ghost/validate").status_code == 404


# -- simulation lifecycle -----------------------------------------------------

def test_run_to_completion_and_log(client):
    r = client.post("/simulations", json=SHORT_RUN)
    assert r.status_code == 201
    sim_id = r.json()["id"]
    assert r.json()["status"] == "created"

    r = client.post(f"/simulations/{sim_id}/control", json={"action": "start"})
    assert r.json()["status"] == "running"
    body = wait_ended(client, sim_id)
    results = body["results"]
    assert results["total"] == 3
    assert results["survived"] + results["died"] + results["unresolved"] == 3
    assert results["end_reason"] == "time_limit"
    assert results["elapsed_ticks"] == 100

    log = read_log(client, sim_id)
    assert log[0] == {"format": "metis-events", "version": 1, "seed": 3,
                      "scenario_id": "one_room"}
    assert log[-1]["kind"] == "sim_ended"


def test_lifecycle_guards(client):
    sim_id = client.post("/simulations", json=SHORT_RUN).json()["id"]
    control = f"/simulations/{sim_id}/control"
    assert client.post(control, json={"action": "pause"}).status_code == 409
    assert client.post(control, json={"action": "bounce"}).status_code == 400
    client.post(control, json={"action": "start"})
    assert client.post(control, json={"action": "start"}).status_code == 409
    wait_ended(client, sim_id)
    assert client.post(control, json={"action": "stop"}).status_code == 409

    assert client.post("/simulations/nope/control",
                       json={"action": "start"}).status_code == 404
    assert client.get("/simulations/nope/results").status_code == 404


def test_stop_before_start_ends_synchronously(client):
    sim_id = client.post("/simulations", json=SHORT_RUN).json()["id"]
    r = client.post(f"/simulations/{sim_id}/control", json={"action": "stop"})
    assert r.json()["status"] == "ended"
    body = client.get(f"/simulations/{sim_id}/results").json()
    assert body["results"]["end_reason"] == "manual"
    assert read_log(client, sim_id)[-1]["kind"] == "sim_ended"


def test_create_simulation_errors(client):
    r = client.post("/simulations", json={"scenario_id": "ghost"})
    assert r.status_code == 404
    r = client.post("/simulations", json={"scenario_id": "one_room",
                                          "policy": "missing.ckpt"})
    assert r.status_code == 400
    r = client.post("/simulations", json={"scenario_id": "one_room",
                                          "end_conditions": ["sideways"]})
    assert r.status_code == 400


def test_simulation_with_checkpoint_policy(client):
    state = init_trainer(
        load_sample("small_room"), RewardConfig(), TrainerConfig(seed=1),
        net_cfg=NetworkConfig(input_dim=70, hidden_width=16, hidden_depth=1))
    (client.data_dir / "tiny.ckpt").write_bytes(save_checkpoint(state))
    body = dict(SHORT_RUN, policy="tiny.ckpt")
    r = client.post("/simulations", json=body)
    assert r.status_code == 201


# -- live fire injection ------------------------------------------------------

def test_injection_appears_within_two_ticks(client):
    sim_id = client.post("/simulations", json=SHORT_RUN).json()["id"]
    r = client.post(f"/simulations/{sim_id}/fires",
                    json={"origin": [7.0, 2.0], "max_radius": 1.5,
                          "growth_rate": 0.5, "patch_rate": 2})
    assert r.status_code == 202
    effective = r.json()["effective_tick"]
    assert effective == 1
    client.post(f"/simulations/{sim_id}/control", json={"action": "start"})
    wait_ended(client, sim_id)

    log = read_log(client, sim_id)
    injected = [e for e in log if e.get("kind") == "fire_injected"]
    assert injected[0]["tick"] == effective
    assert injected[0]["payload"]["x"] == 7.0
    burning = [e for e in log if e.get("kind") == "fire_ignited"
               and e["payload"]["source"] == 1]
    assert burning and burning[0]["tick"] <= effective + 2


def test_injection_errors(client):
    sim_id = client.post("/simulations", json=SHORT_RUN).json()["id"]
    fires = f"/simulations/{sim_id}/fires"
    r = client.post(fires, json={"origin": [999.0, 0.0]})
    assert r.status_code == 400
    assert [i["code"] for i in r.json()["issues"]] == ["FireOutsideBounds"]
    assert client.post(fires, json={"radius": 1}).status_code == 400
    assert client.post("/simulations/nope/fires",
                       json={"origin": [1, 1]}).status_code == 404

    client.post(f"/simulations/{sim_id}/control", json={"action": "stop"})
    assert client.post(fires, json={"origin": [7.0, 2.0]}).status_code == 409


# -- websocket stream ---------------------------------------------------------

def test_stream_frames_monotone_then_ended(client):
    sim_id = client.post("/simulations", json=SHORT_RUN).json()["id"]
    client.post(f"/simulations/{sim_id}/control", json={"action": "start"})
    ticks = []
    ended = None
    with client.websocket_connect(f"/simulations/{sim_id}/stream") as ws:
        while True:
            msg = json.loads(ws.receive_text())
            if "event" in msg:
                ended = msg
                break
            ticks.append(msg["tick"])
            assert {"agents", "fires", "totals"} <= set(msg)
            totals = msg["totals"]
            assert totals["safe"] + totals["dead"] + totals["active"] == 3
            assert len(msg["agents"]) == 3
    assert ticks == sorted(ticks)
    assert len(set(ticks)) == len(ticks)
    assert ended["event"] == "ended"
    assert ended["results"]["elapsed_ticks"] == 100


def test_stream_unknown_sim_closes(client):
    with pytest.raises(Exception):
        with client.websocket_connect("/simulations/nope/stream") as ws:
            ws.receive_text()
