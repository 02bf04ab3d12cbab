"""HTTP service, job management, and the LLM geometry loop.

The LLM backend is any callable taking a chat-messages list and returning
the assistant's text; the default implementation posts to an
OpenAI-compatible /chat/completions endpoint configured by the
LMDEM_LLM_BASE_URL / LMDEM_LLM_MODEL / LMDEM_LLM_API_KEY environment
variables. Tests inject deterministic stubs instead.
"""

from __future__ import annotations

import json
import os
import queue
import threading
import uuid
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, Response

from .io import (
    RunConfig,
    SchemaError,
    _BOUNDARY_DEFAULTS,
    _GEOMETRY_DEFAULTS,
    _MATERIAL_DEFAULTS,
    _NETWORK_DEFAULTS,
    _TRAINING_DEFAULTS,
    validate_config,
)
from .mesh import GeoRequest, Mesh, MeshError, MesherFailure, mesh_from_geo
from .runner import run_config


class BackendError(Exception):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"LLM backend error {status}: {detail}")


class NoGeoBlock(Exception):
    pass


class RetriesExhausted(Exception):
    def __init__(self, diagnostics: str):
        self.diagnostics = diagnostics
        super().__init__(f"geometry generation failed after retries: {diagnostics}")


def system_prompt() -> str:
    return resources.files("lmdem.assets").joinpath("geo_system_prompt.txt").read_text()


def default_llm_backend():
    """Chat-completions client configured from the environment."""
    import httpx

    base = os.environ.get("LMDEM_LLM_BASE_URL", "https://api.openai.com/v1")
    model = os.environ.get("LMDEM_LLM_MODEL", "gpt-4o")
    key = os.environ.get("LMDEM_LLM_API_KEY", "")

    def complete(messages: list[dict]) -> str:
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = httpx.post(
                f"{base.rstrip('/')}/chat/completions",
                json={"model": model, "messages": messages},
                headers=headers,
                timeout=120.0,
            )
        except httpx.HTTPError as exc:
            raise BackendError(502, str(exc))
        if resp.status_code != 200:
            raise BackendError(resp.status_code, resp.text[:500])
        return resp.json()["choices"][0]["message"]["content"]

    return complete


@dataclass
class ChatSession:
    id: str
    backend: object
    messages: list[dict] = field(default_factory=list)
    last_geo: str | None = None
    last_mesh: Mesh | None = None
    retry_budget: int = 3

    def __post_init__(self):
        if not self.messages:
            self.messages.append({"role": "system", "content": system_prompt()})


def extract_geo_block(text: str) -> str:
    """First fenced code block in the reply."""
    start = text.find("```")
    if start < 0:
        raise NoGeoBlock("reply contains no fenced code block")
    body_start = text.find("\n", start)
    if body_start < 0:
        raise NoGeoBlock("reply contains no fenced code block")
    end = text.find("```", body_start)
    if end < 0:
        raise NoGeoBlock("fenced code block is not closed")
    return text[body_start + 1 : end].strip() + "\n"


REQUIRED_GROUPS = ("Omega", "Gamma_u", "Gamma_t")


def llm_geo_turn(
    session: ChatSession, user_msg: str, dim: int, lc: float, mesher=None
) -> tuple[str, Mesh]:
    """One geometry turn: ask the model for a .geo script, mesh it, and
    feed failures back as follow-up turns until the retry budget runs out."""
    session.messages.append({"role": "user", "content": user_msg})
    last_diag = "no attempt made"
    for _ in range(session.retry_budget + 1):
        reply = session.backend(session.messages)
        session.messages.append({"role": "assistant", "content": reply})
        try:
            geo = extract_geo_block(reply)
            mesh = mesh_from_geo(
                GeoRequest(geo_text=geo, characteristic_length=lc, dim=dim), mesher
            )
            missing = [g for g in REQUIRED_GROUPS if g not in mesh.groups]
            if missing:
                raise MeshError(f"mesh is missing physical groups: {missing}")
        except NoGeoBlock as exc:
            last_diag = str(exc)
        except MesherFailure as exc:
            last_diag = exc.diagnostics
        except MeshError as exc:
            last_diag = str(exc)
        else:
            session.last_geo = geo
            session.last_mesh = mesh
            return geo, mesh
        session.messages.append(
            {
                "role": "user",
                "content": (
                    "The previous attempt failed with this error:\n"
                    f"{last_diag}\n"
                    "Please return a corrected, complete .geo file in one fenced block."
                ),
            }
        )
    raise RetriesExhausted(last_diag)


# Jobs ------------------------------------------------------------------------

JOB_STATES = ("queued", "running", "done", "failed", "aborted")


@dataclass
class Job:
    id: str
    config: RunConfig
    state: str = "queued"
    epoch: int = 0
    loss: float | None = None
    error: str | None = None
    abort_requested: bool = False


class JobManager:
    """Filesystem-backed queue running one solver job at a time."""

    def __init__(self, root: str, mesher=None):
        self.root = root
        self.mesher = mesher
        os.makedirs(root, exist_ok=True)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._queue: queue.Queue[str] = queue.Queue()
        self._worker = threading.Thread(target=self._run_loop, daemon=True)
        self._worker.start()

    def job_dir(self, job_id: str) -> str:
        return os.path.join(self.root, job_id)

    def submit(self, config: RunConfig) -> str:
        job_id = uuid.uuid4().hex[:12]
        job = Job(id=job_id, config=config)
        os.makedirs(self.job_dir(job_id), exist_ok=True)
        with self._lock:
            self._jobs[job_id] = job
        self._persist(job)
        self._queue.put(job_id)
        return job_id

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is not None:
            return job
        # restart path: recover a finished job from its state file
        state_path = os.path.join(self.job_dir(job_id), "state.json")
        if os.path.exists(state_path):
            with open(state_path) as fh:
                data = json.load(fh)
            job = Job(
                id=job_id,
                config=validate_config(data["config"]),
                state=data["state"],
                epoch=data.get("epoch", 0),
                loss=data.get("loss"),
                error=data.get("error"),
            )
            with self._lock:
                self._jobs[job_id] = job
            return job
        return None

    def abort(self, job_id: str) -> Job:
        job = self.get(job_id)
        if job is None:
            raise KeyError(job_id)
        with self._lock:
            if job.state not in ("queued", "running"):
                raise ValueError(f"job is {job.state}")
            job.abort_requested = True
            if job.state == "queued":
                job.state = "aborted"
        self._persist(job)
        return job

    def _persist(self, job: Job):
        data = {
            "id": job.id,
            "state": job.state,
            "epoch": job.epoch,
            "loss": job.loss,
            "error": job.error,
            "config": job.config.to_dict(),
        }
        with open(os.path.join(self.job_dir(job.id), "state.json"), "w") as fh:
            json.dump(data, fh, indent=2)

    def _run_loop(self):
        while True:
            job_id = self._queue.get()
            job = self.get(job_id)
            if job is None or job.state != "queued":
                continue
            with self._lock:
                job.state = "running"
            self._persist(job)

            def progress(epoch, loss, job=job):
                with self._lock:
                    job.epoch = epoch
                    job.loss = float(loss)
                if epoch % 50 == 0:
                    self._persist(job)

            try:
                run_config(
                    job.config,
                    self.job_dir(job.id),
                    mesher=self.mesher,
                    progress=progress,
                    should_stop=lambda job=job: job.abort_requested,
                )
                with self._lock:
                    job.state = "aborted" if job.abort_requested else "done"
            except Exception as exc:  # surfaced via the job state
                with self._lock:
                    job.state = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
            self._persist(job)


# HTTP API ---------------------------------------------------------------------

def default_config_dict() -> dict:
    import copy

    return copy.deepcopy(
        {
            "geometry": _GEOMETRY_DEFAULTS,
            "material": _MATERIAL_DEFAULTS,
            "boundary": _BOUNDARY_DEFAULTS,
            "network": _NETWORK_DEFAULTS,
            "training": _TRAINING_DEFAULTS,
        }
    )


def _mesh_payload(mesh: Mesh) -> dict:
    return {
        "dim": mesh.dim,
        "nodes": np.asarray(mesh.nodes).ravel().tolist(),
        "elements": [{"kind": kind, "conn": list(conn)} for kind, conn in mesh.elements],
        "groups": {name: sorted(ids) for name, ids in mesh.groups.items()},
    }


def create_app(job_root: str, llm_backend=None, mesher=None):
    app = FastAPI(title="lmdem service")
    manager = JobManager(job_root, mesher=mesher)
    sessions: dict[str, ChatSession] = {}
    backend_factory = llm_backend if llm_backend is not None else default_llm_backend

    def get_job(job_id: str) -> Job:
        job = manager.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return job

    @app.get("/defaults")
    def defaults():
        return default_config_dict()

    @app.post("/sessions", status_code=201)
    def new_session():
        backend = backend_factory() if callable(backend_factory) else backend_factory
        session = ChatSession(id=uuid.uuid4().hex[:12], backend=backend)
        sessions[session.id] = session
        return {"id": session.id}

    @app.post("/sessions/{session_id}/turn")
    async def turn(session_id: str, request: Request):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        body = await request.json()
        text = body.get("text", "")
        dim = int(body.get("dim", 2))
        lc = float(body.get("lc", 0.1))
        try:
            geo, mesh = llm_geo_turn(session, text, dim, lc, mesher=manager.mesher)
        except BackendError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        except RetriesExhausted as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return {
            "geo_text": geo,
            "mesh": _mesh_payload(mesh),
            "transcript": session.messages,
        }

    @app.get("/sessions/{session_id}/mesh")
    def session_mesh(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        if session.last_mesh is None:
            raise HTTPException(status_code=404, detail="session has no mesh yet")
        return _mesh_payload(session.last_mesh)

    @app.post("/jobs", status_code=202)
    async def submit_job(request: Request):
        body = await request.json()
        try:
            config = validate_config(body)
        except SchemaError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"id": manager.submit(config)}

    @app.get("/jobs/{job_id}")
    def job_state(job_id: str):
        job = get_job(job_id)
        return {
            "id": job.id,
            "state": job.state,
            "epoch": job.epoch,
            "loss": job.loss,
            "error": job.error,
        }

    @app.get("/jobs/{job_id}/history")
    def job_history(job_id: str):
        job = get_job(job_id)
        path = os.path.join(manager.job_dir(job_id), "history.csv")
        if not os.path.exists(path):
            return {"epochs": [], "losses": []}
        from .io import read_history

        losses = read_history(path)
        return {"epochs": list(range(len(losses))), "losses": losses}

    @app.get("/jobs/{job_id}/field")
    def job_field(job_id: str, name: str):
        get_job(job_id)
        path = os.path.join(manager.job_dir(job_id), "fields.npz")
        if not os.path.exists(path):
            raise HTTPException(status_code=404, detail="no fields yet")
        with np.load(path) as data:
            if name not in data:
                raise HTTPException(
                    status_code=404,
                    detail=f"unknown field {name}; available: {sorted(data.keys())}",
                )
            values = data[name].tolist()
        from .mesh import parse_msh

        with open(os.path.join(manager.job_dir(job_id), "mesh.msh"), "rb") as fh:
            mesh = parse_msh(fh.read())
        payload = _mesh_payload(mesh)
        return {"name": name, "values": values, "mesh": payload}

    @app.get("/jobs/{job_id}/fields")
    def job_fields(job_id: str):
        get_job(job_id)
        path = os.path.join(manager.job_dir(job_id), "fields.npz")
        if not os.path.exists(path):
            return {"names": []}
        with np.load(path) as data:
            return {"names": sorted(data.keys())}

    @app.post("/jobs/{job_id}/abort")
    def abort_job(job_id: str):
        get_job(job_id)
        try:
            job = manager.abort(job_id)
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": job.id, "state": job.state}

    @app.get("/jobs/{job_id}/vtk")
    def job_vtk(job_id: str, solver: str = "dem"):
        get_job(job_id)
        path = os.path.join(manager.job_dir(job_id), f"solution_{solver}.vtk")
        if not os.path.exists(path):
            raise HTTPException(status_code=404, detail="no VTK artifact")
        with open(path, "rb") as fh:
            return Response(content=fh.read(), media_type="application/octet-stream")

    @app.get("/", response_class=PlainTextResponse)
    def index():
        return "lmdem service"

    app.state.jobs = manager
    app.state.sessions = sessions
    return app
