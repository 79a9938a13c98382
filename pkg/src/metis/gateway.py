"""HTTP/WebSocket service: scenario CRUD, simulation lifecycle and control,
live fire injection, and frame streaming.

Scenarios and event logs are plain files under a data directory. Each
running simulation is owned by one worker thread; every command against it
(control, injection, frame reads) serializes through the handle's lock, so
the engine itself stays single-owner. Stream frames coalesce to at most 30
per second, always carry the latest tick, and a terminal "ended" message is
never skipped.
"""

from __future__ import annotations

import asyncio
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Request, Response, WebSocket, WebSocketDisconnect

from . import __version__
from .engine import EndCondition, Simulation, parse_end_condition
from .errors import MetisError, ParseError, SimEnded, VersionError
from .hazards import DT
from .trainer import Policy, policy_from_checkpoint, random_policy
from .world import (
    FireSource,
    canonicalize,
    load_scenario,
    sample_bytes,
    sample_names,
    validate,
)

MAX_FRAME_RATE = 30.0
_ID_RE = re.compile(r"^[A-Za-z0-9_.-]{1,64}$")


@dataclass
class SimulationHandle:
    id: str
    scenario_id: str
    sim: Simulation
    seed: int
    speed: float  # real-time factor; 0 = as fast as possible
    status: str = "created"  # created | running | paused | ended
    lock: threading.Lock = field(default_factory=threading.Lock)
    thread: threading.Thread | None = None
    paused: bool = False
    stop_requested: bool = False


class Store:
    """File-backed scenario and log storage with per-id write locking."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        (self.root / "scenarios").mkdir(parents=True, exist_ok=True)
        (self.root / "logs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seed_samples()

    def _seed_samples(self):
        for name in sample_names():
            path = self.root / "scenarios" / f"{name}.json"
            if not path.exists():
                path.write_bytes(canonicalize(sample_bytes(name)))

    def scenario_path(self, sid: str) -> Path:
        if not _ID_RE.match(sid):
            raise KeyError(sid)
        return self.root / "scenarios" / f"{sid}.json"

    def list_scenarios(self) -> list[dict]:
        out = []
        for path in sorted((self.root / "scenarios").glob("*.json")):
            try:
                doc = json.loads(path.read_text("utf-8"))
            except json.JSONDecodeError:
                continue
            out.append({"id": path.stem, "name": doc.get("name", "")})
        return out

    def read(self, sid: str) -> bytes:
        path = self.scenario_path(sid)
        if not path.exists():
            raise KeyError(sid)
        return path.read_bytes()

    def write(self, sid: str, data: bytes):
        with self._lock:
            self.scenario_path(sid).write_bytes(data)

    def delete(self, sid: str):
        path = self.scenario_path(sid)
        if not path.exists():
            raise KeyError(sid)
        with self._lock:
            path.unlink()

    def write_log(self, sim_id: str, data: bytes):
        (self.root / "logs" / f"{sim_id}.ndjson").write_bytes(data)


def _issues_json(issues) -> list[dict]:
    return [{"code": i.code, "entity": i.entity, "detail": i.detail}
            for i in issues]


def _parse_end_conditions(raw) -> list[EndCondition]:
    conditions = []
    for item in raw or []:
        if isinstance(item, str):
            conditions.append(parse_end_condition(item))
        elif isinstance(item, dict):
            conditions.append(EndCondition(
                kind=item["kind"],
                n=item.get("n"),
                seconds=item.get("seconds")))
        else:
            raise ValueError(f"bad end condition: {item!r}")
    return conditions


def _frame(handle: SimulationHandle) -> dict:
    sim = handle.sim
    agents = [{"id": a.id, "x": a.position[0], "z": a.position[1],
               "status": a.status} for a in sim.agents]
    fires = [{"x": float(c[0]), "z": float(c[1]), "r": float(c[2])}
             for c in sim.fires.circles()]
    r = sim.results()
    return {"tick": sim.tick, "agents": agents, "fires": fires,
            "totals": {"safe": r.survived, "dead": r.died,
                       "active": r.unresolved}}


def _load_policy(spec, data_dir: Path) -> Policy:
    """Resolve the request's policy field: checkpoint path or seeded random."""
    if not spec:
        return random_policy()
    path = Path(spec)
    if not path.is_absolute():
        path = data_dir / spec
    if not path.exists():
        raise FileNotFoundError(f"policy checkpoint not found: {spec}")
    return policy_from_checkpoint(path.read_bytes())


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="metis gateway", version=__version__)
    store = Store(data_dir)
    sims: dict[str, SimulationHandle] = {}
    sims_lock = threading.Lock()

    # -- health ------------------------------------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    # -- scenarios ---------------------------------------------------------

    @app.get("/scenarios")
    def list_scenarios():
        return store.list_scenarios()

    @app.post("/scenarios", status_code=201)
    async def create_scenario(request: Request, response: Response):
        body = await request.body()
        try:
            scenario = load_scenario(body)
        except (ParseError, VersionError) as e:
            response.status_code = 400
            return {"error": str(e)}
        sid = scenario.id if _ID_RE.match(scenario.id) else uuid.uuid4().hex[:12]
        if store.scenario_path(sid).exists():
            response.status_code = 409
            return {"error": f"scenario {sid!r} already exists"}
        store.write(sid, canonicalize(body))
        return {"id": sid}

    @app.get("/scenarios/{sid}")
    def get_scenario(sid: str, response: Response):
        try:
            data = store.read(sid)
        except KeyError:
            response.status_code = 404
            return {"error": "not found"}
        return Response(content=data, media_type="application/json")

    @app.put("/scenarios/{sid}")
    async def put_scenario(sid: str, request: Request, response: Response):
        if not _ID_RE.match(sid):
            response.status_code = 400
            return {"error": "bad scenario id"}
        body = await request.body()
        try:
            doc = json.loads(body)
            if not isinstance(doc, dict):
                raise ParseError("expected an object", "$")
            doc["id"] = sid  # path id wins
            canonical = canonicalize(json.dumps(doc))
        except (json.JSONDecodeError, ParseError, VersionError) as e:
            response.status_code = 400
            return {"error": str(e)}
        store.write(sid, canonical)
        return {"id": sid}

    @app.delete("/scenarios/{sid}", status_code=204)
    def delete_scenario(sid: str, response: Response):
        try:
            store.delete(sid)
        except KeyError:
            response.status_code = 404
            return {"error": "not found"}

    @app.post("/scenarios/{sid}/validate")
    def validate_scenario(sid: str, response: Response):
        try:
            scenario = load_scenario(store.read(sid))
        except KeyError:
            response.status_code = 404
            return {"error": "not found"}
        return {"issues": _issues_json(validate(scenario))}

    # -- simulations -------------------------------------------------------

    @app.post("/simulations", status_code=201)
    def create_simulation(body: dict = Body(...), response: Response = None):
        try:
            scenario = load_scenario(store.read(body["scenario_id"]))
            policy = _load_policy(body.get("policy"), store.root)
            conditions = _parse_end_conditions(body.get("end_conditions"))
            seed = int(body.get("seed", 0))
            speed = float(body.get("speed", 1.0))
            sim = Simulation(scenario, policy, conditions or None, seed)
        except KeyError as e:
            response.status_code = 404
            return {"error": f"unknown scenario: {e}"}
        except (MetisError, ValueError, FileNotFoundError) as e:
            response.status_code = 400
            return {"error": str(e)}
        handle = SimulationHandle(id=uuid.uuid4().hex[:12],
                                  scenario_id=body["scenario_id"],
                                  sim=sim, seed=seed, speed=speed)
        with sims_lock:
            sims[handle.id] = handle
        return {"id": handle.id, "status": handle.status}

    def _get_handle(sim_id: str) -> SimulationHandle | None:
        with sims_lock:
            return sims.get(sim_id)

    def _run_loop(handle: SimulationHandle):
        tick_seconds = DT / handle.speed if handle.speed > 0 else 0.0
        next_deadline = time.monotonic()
        while True:
            with handle.lock:
                if handle.stop_requested and not handle.sim.ended:
                    handle.sim.stop()
                if handle.sim.ended:
                    handle.status = "ended"
                    store.write_log(handle.id, handle.sim.log_bytes())
                    return
                if not handle.paused:
                    handle.sim.step()
            if handle.paused:
                time.sleep(0.01)
                next_deadline = time.monotonic()
                continue
            if tick_seconds > 0:
                next_deadline += tick_seconds
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)

    @app.post("/simulations/{sim_id}/control")
    def control_simulation(sim_id: str, body: dict = Body(...),
                           response: Response = None):
        handle = _get_handle(sim_id)
        if handle is None:
            response.status_code = 404
            return {"error": "not found"}
        action = body.get("action")
        with handle.lock:
            status = handle.status
        if action == "start":
            if status != "created":
                response.status_code = 409
                return {"error": f"cannot start from {status}"}
            handle.status = "running"
            handle.thread = threading.Thread(target=_run_loop, args=(handle,),
                                             daemon=True)
            handle.thread.start()
        elif action == "pause":
            if status != "running":
                response.status_code = 409
                return {"error": f"cannot pause from {status}"}
            handle.paused = True
            handle.status = "paused"
        elif action == "resume":
            if status != "paused":
                response.status_code = 409
                return {"error": f"cannot resume from {status}"}
            handle.paused = False
            handle.status = "running"
        elif action == "stop":
            if status == "ended":
                response.status_code = 409
                return {"error": "already ended"}
            handle.stop_requested = True
            handle.paused = False
            if handle.thread is None:
                # never started: end it synchronously
                with handle.lock:
                    handle.sim.stop()
                    handle.status = "ended"
                    store.write_log(handle.id, handle.sim.log_bytes())
            else:
                handle.status = "running"
        else:
            response.status_code = 400
            return {"error": f"unknown action: {action!r}"}
        return {"id": handle.id, "status": handle.status}

    @app.post("/simulations/{sim_id}/fires", status_code=202)
    def inject_fire(sim_id: str, body: dict = Body(...),
                    response: Response = None):
        handle = _get_handle(sim_id)
        if handle is None:
            response.status_code = 404
            return {"error": "not found"}
        try:
            source = FireSource(
                origin=tuple(body["origin"]),
                max_radius=float(body.get("max_radius", 3.0)),
                growth_rate=float(body.get("growth_rate", 0.25)),
                patch_rate=int(body.get("patch_rate", 3)))
        except (KeyError, TypeError, ValueError):
            response.status_code = 400
            return {"error": "bad fire source payload"}
        with handle.lock:
            try:
                effective = handle.sim.inject_fire(source)
            except SimEnded:
                response.status_code = 409
                return {"error": "simulation ended"}
            except ValueError as e:
                response.status_code = 400
                return {"error": str(e),
                        "issues": _issues_json(getattr(e, "issues", []))}
        return {"effective_tick": effective}

    @app.get("/simulations/{sim_id}/results")
    def get_results(sim_id: str, response: Response):
        handle = _get_handle(sim_id)
        if handle is None:
            response.status_code = 404
            return {"error": "not found"}
        with handle.lock:
            return {"id": handle.id, "status": handle.status,
                    "results": handle.sim.results().to_dict()}

    # -- stream ------------------------------------------------------------

    @app.websocket("/simulations/{sim_id}/stream")
    async def stream(websocket: WebSocket, sim_id: str):
        handle = _get_handle(sim_id)
        await websocket.accept()
        if handle is None:
            await websocket.close(code=4404)
            return
        last_tick = -1
        try:
            while True:
                with handle.lock:
                    frame = _frame(handle)
                    ended = handle.sim.ended
                    results = handle.sim.results().to_dict() if ended else None
                if frame["tick"] > last_tick or ended:
                    if frame["tick"] > last_tick:
                        await websocket.send_text(json.dumps(frame))
                        last_tick = frame["tick"]
                    if ended:
                        await websocket.send_text(json.dumps(
                            {"event": "ended", "results": results}))
                        break
                await asyncio.sleep(1.0 / MAX_FRAME_RATE)
            await websocket.close()
        except WebSocketDisconnect:
            pass

    return app


def serve(addr: str = "127.0.0.1:8000", data_dir: str = "./metis-data"):
    """Blocking server entry point."""
    import uvicorn

    host, _, port = addr.partition(":")
    uvicorn.run(create_app(data_dir), host=host or "127.0.0.1",
                port=int(port or 8000), log_level="warning")
