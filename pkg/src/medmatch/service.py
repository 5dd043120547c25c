"""HTTP service: login, catalog ingestion, query submission, logs.

JSON API:
  POST /login      {username, password}            -> {token, role}
  POST /query      {query}  (bearer token)         -> rendered response
  POST /providers  CSV or JSON body (admin role)   -> {version}
  GET  /schema                                     -> attribute schemas
  GET  /log?limit=N (admin or analyst role)        -> query log entries
  GET  /health                                     -> {status: ok}

The rendered response carries `machine_payload`, the full match report:
  {query_text, snapshot_version, empty_catalog,
   matches: [{provider_id, display_name, kind, values}],
   relaxations: [{dropped: [{index, text}], resulting_matches}],
   queried_attributes, constraints, timings: {translation_ms, solve_ms},
   stats}
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from pydantic import BaseModel

from .auth import AuthError, CredentialStore, TokenStore
from .catalog import CatalogError, CatalogStore, default_schemas, load_schema
from .matching import match_query
from .querylang import (
    QuerySyntaxError,
    QueryValidationError,
    parse_query,
    validate,
)
from .response import load_templates, render


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    catalog_path: str | None = None
    credentials_path: str | None = None
    schema_path: str | None = None
    template_path: str | None = None
    query_log_path: str | None = None
    token_ttl_seconds: float = 3600.0
    solver_seed: int = 0
    bench: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        listen = doc.pop("listen", None)
        config = cls(**doc)
        if listen:
            host, _, port = listen.partition(":")
            config.host = host or config.host
            if port:
                config.port = int(port)
        return config


class LoginBody(BaseModel):
    username: str
    password: str


class QueryBody(BaseModel):
    query: str


class QueryLog:
    """Append-only query log with monotonic ids, optionally file-backed."""

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._path = Path(path) if path else None
        self._entries: list[dict] = []
        if self._path and self._path.exists():
            for line in self._path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._entries.append(json.loads(line))

    def append(self, **fields) -> dict:
        with self._lock:
            entry = {"id": len(self._entries) + 1, **fields}
            self._entries.append(entry)
            if self._path:
                with self._path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps(entry) + "\n")
            return entry

    def tail(self, limit: int) -> list[dict]:
        with self._lock:
            return list(self._entries[-limit:]) if limit > 0 else []


def demo_credentials() -> CredentialStore:
    store = CredentialStore()
    store.add_user("pat", "pat-password", "patient")
    store.add_user("admin", "admin-password", "provider_admin")
    store.add_user("ana", "ana-password", "analyst")
    return store


def create_app(
    config: ServiceConfig | None = None,
    catalog_store: CatalogStore | None = None,
    credentials: CredentialStore | None = None,
    tokens: TokenStore | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    if catalog_store is None:
        schemas = (
            load_schema(Path(config.schema_path).read_text(encoding="utf-8"))
            if config.schema_path
            else default_schemas()
        )
        catalog_store = CatalogStore(schemas)
        if config.catalog_path and Path(config.catalog_path).exists():
            catalog_store.load(config.catalog_path)
    if credentials is None:
        credentials = (
            CredentialStore.from_file(config.credentials_path)
            if config.credentials_path
            else demo_credentials()
        )
    tokens = tokens or TokenStore(ttl_seconds=config.token_ttl_seconds)
    templates = load_templates(config.template_path)
    query_log = QueryLog(config.query_log_path)

    app = FastAPI(title="medmatch", version="0.1.0")
    app.state.catalog_store = catalog_store
    app.state.tokens = tokens
    app.state.query_log = query_log

    def session_for(authorization: str | None = Header(default=None)):
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(401, detail={"error": "missing bearer token"})
        try:
            return tokens.check(authorization.removeprefix("Bearer "))
        except AuthError as exc:
            raise HTTPException(401, detail={"error": str(exc)}) from exc

    def require_role(session, allowed: tuple[str, ...]) -> None:
        if session.role not in allowed:
            raise HTTPException(403, detail={"error": f"role {session.role!r} forbidden"})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/login")
    def login(body: LoginBody):
        try:
            role = credentials.verify(body.username, body.password)
        except AuthError as exc:
            raise HTTPException(401, detail={"error": str(exc)}) from exc
        return {"token": tokens.issue(body.username, role), "role": role}

    @app.get("/schema")
    def schema():
        return [
            {
                "name": s.name,
                "kind": s.kind,
                "lo": s.lo,
                "hi": s.hi,
                "description": s.description,
            }
            for s in catalog_store.snapshot().schemas
        ]

    @app.post("/query")
    def submit_query(body: QueryBody, session=Depends(session_for)):
        snapshot = catalog_store.snapshot()
        try:
            ast = validate(parse_query(body.query), list(snapshot.schemas))
        except (QuerySyntaxError, QueryValidationError) as exc:
            raise HTTPException(
                400, detail={"error": exc.message, "position": exc.position}
            ) from exc
        report = match_query(ast, snapshot, query_text=body.query)
        rendered = render(report, snapshot.schemas, templates)
        query_log.append(
            username=session.username,
            query_text=body.query,
            snapshot_version=snapshot.version,
            timestamp=time.time(),
            match_count=len(report.matches),
            relaxation_count=len(report.relaxations),
            timings=report.timings,
        )
        return rendered.to_dict()

    @app.post("/providers")
    async def ingest(request: Request, session=Depends(session_for)):
        require_role(session, ("provider_admin",))
        raw = (await request.body()).decode("utf-8")
        content_type = request.headers.get("content-type", "")
        try:
            if content_type.startswith("application/json"):
                snapshot = catalog_store.ingest(json.loads(raw))
            else:
                snapshot = catalog_store.ingest(raw)
        except (CatalogError, json.JSONDecodeError) as exc:
            raise HTTPException(400, detail={"error": str(exc)}) from exc
        if config.catalog_path:
            catalog_store.save(config.catalog_path)
        return {"version": snapshot.version}

    @app.get("/log")
    def log(limit: int = 50, session=Depends(session_for)):
        require_role(session, ("provider_admin", "analyst"))
        return query_log.tail(limit)

    return app
