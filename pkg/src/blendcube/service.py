"""HTTP facade: sessions and operations over JSON.

Endpoints:
    POST /sessions {dataset}            -> 201 {session_id}
    GET  /sessions/{id}/schema          -> constellation summary (for forms)
    GET  /sessions/{id}/table           -> grid document
    POST /sessions/{id}/ops {op, ...}   -> grid document after the operation
    GET  /sessions/{id}/sql             -> {sql}

Grid documents are versioned (see GRID_DOCUMENT_VERSION): header trees are
recursive {value, children} nodes, EMPTY cells encode as null. Errors: 404
unknown session, 400 malformed descriptor or predicate (with column), 422
blend constraint violation (with offending_values), 409 strictness in data.

Operations on one session are serialized behind a lock; the constellation is
shared read-only across sessions. Sessions expire after
BLENDCUBE_SESSION_TTL seconds (default 1800) of inactivity.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from decimal import Decimal
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    BlendcubeError,
    ConstraintViolation,
    OperatorError,
    PredicateError,
    StrictnessError,
)
from .ingest import build_sample_constellation, load_dataset
from .mtable import Grid, evaluate
from .session import Session

GRID_DOCUMENT_VERSION = 1
DEFAULT_TTL_SECONDS = 1800


def json_value(v):
    """Attribute/measure values on the wire: text as strings, decimals as numbers."""
    if isinstance(v, Decimal):
        if v == v.to_integral_value():
            return int(v)
        return float(v)
    return v


def header_tree(tuples: list[tuple]) -> list[dict]:
    """Nest sorted header tuples into {value, children} spans."""
    if not tuples or not tuples[0]:
        return []
    roots: list[dict] = []
    for tup in tuples:
        nodes = roots
        for depth, component in enumerate(tup):
            value = json_value(component)
            if nodes and nodes[-1]["value"] == value and nodes[-1]["_depth"] == depth and nodes[-1]["_path"] == tup[: depth + 1]:
                node = nodes[-1]
            else:
                node = {"value": value, "_depth": depth, "_path": tup[: depth + 1], "children": []}
                nodes.append(node)
            nodes = node["children"]
    _strip_private(roots)
    return roots


def _strip_private(nodes):
    for n in nodes:
        n.pop("_depth", None)
        n.pop("_path", None)
        _strip_private(n["children"])


def grid_document(session: Session) -> dict:
    """The UI contract: everything a client needs to render and drive a table."""
    doc = {
        "version": GRID_DOCUMENT_VERSION,
        "table": None,
        "log": [_describe(e.descriptor) for e in session.log],
    }
    t = session.table
    if t is None:
        return doc
    g: Grid = evaluate(t, session.constellation)
    doc["table"] = {
        "subject": {
            "fact": t.fact,
            "measures": [{"fn": m.agg, "measure": m.name} for m in t.measures],
        },
        "lines": _axis_doc(t.lines),
        "columns": _axis_doc(t.columns),
        "row_headers": header_tree(g.row_tuples),
        "col_headers": header_tree(g.col_tuples),
        "row_tuples": [[json_value(v) for v in rt] for rt in g.row_tuples],
        "col_tuples": [[json_value(v) for v in ct] for ct in g.col_tuples],
        "measures": list(g.measures),
        "cells": [
            [
                (
                    None
                    if g.cell(rt, ct) is None
                    else {m: json_value(val) for m, val in g.cell(rt, ct).items()}
                )
                for ct in g.col_tuples
            ]
            for rt in g.row_tuples
        ],
    }
    return doc


def _axis_doc(axis) -> dict:
    return {
        "dimension": axis.dimension,
        "hierarchy": axis.hierarchy,
        "displayed": list(axis.displayed),
        "order": list(axis.order),
        "available": [p for p in axis.order if p not in axis.displayed],
    }


def _describe(descriptor: dict) -> dict:
    out = {}
    for k, v in descriptor.items():
        out[k] = str(v) if k == "pred" else v
    return out


class _Record:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


def create_app(data_dir: str | None = None, ttl_seconds: float | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="blendcube", version="0.1.0")
    sessions: dict[str, _Record] = {}
    datasets: dict[str, object] = {}
    registry_lock = threading.Lock()
    data_root = data_dir or os.environ.get("BLENDCUBE_DATA_DIR")
    ttl = ttl_seconds if ttl_seconds is not None else float(
        os.environ.get("BLENDCUBE_SESSION_TTL", DEFAULT_TTL_SECONDS)
    )

    def load_named_dataset(name: str):
        with registry_lock:
            if name in datasets:
                return datasets[name]
        if name == "sample":
            c = build_sample_constellation()
        else:
            path = Path(name)
            if not path.is_absolute() and data_root:
                path = Path(data_root) / name
            c = load_dataset(path)
        with registry_lock:
            datasets[name] = c
        return c

    def sweep_expired():
        now = time.monotonic()
        with registry_lock:
            dead = [sid for sid, rec in sessions.items() if now - rec.last_access > ttl]
            for sid in dead:
                del sessions[sid]

    def get_record(session_id: str) -> _Record:
        sweep_expired()
        with registry_lock:
            rec = sessions.get(session_id)
        if rec is None:
            raise LookupError(session_id)
        rec.last_access = time.monotonic()
        return rec

    @app.exception_handler(LookupError)
    async def _unknown_session(_req: Request, exc: LookupError):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc}"})

    @app.exception_handler(BlendcubeError)
    async def _engine_error(_req: Request, exc: BlendcubeError):
        if isinstance(exc, ConstraintViolation):
            return JSONResponse(
                status_code=422,
                content={"detail": {"message": str(exc), "offending_values": exc.offending_values}},
            )
        if isinstance(exc, StrictnessError):
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        if isinstance(exc, PredicateError):
            return JSONResponse(
                status_code=400,
                content={"detail": {"message": str(exc), "column": exc.column}},
            )
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        dataset = body.get("dataset", "sample")
        try:
            constellation = load_named_dataset(dataset)
        except OSError as e:
            raise OperatorError(f"cannot load dataset {dataset!r}: {e}") from None
        sid = uuid.uuid4().hex
        with registry_lock:
            sessions[sid] = _Record(Session(constellation))
        return {"session_id": sid, "dataset": dataset}

    @app.get("/sessions/{session_id}/schema")
    def schema(session_id: str):
        rec = get_record(session_id)
        c = rec.session.constellation
        return {
            "constellation": c.name,
            "facts": [
                {
                    "name": f.name,
                    "measures": [{"name": m.name, "fn": m.agg} for m in f.measures],
                    "dimensions": list(c.star[f.name]),
                }
                for f in c.facts.values()
            ],
            "dimensions": [
                {
                    "name": d.name,
                    "attributes": [{"name": a.name, "type": a.vtype} for a in d.attributes],
                    "hierarchies": [
                        {"name": h.name, "params": list(h.params)} for h in d.hierarchies.values()
                    ],
                }
                for d in c.dimensions.values()
            ],
        }

    @app.get("/sessions/{session_id}/table")
    def table(session_id: str):
        rec = get_record(session_id)
        with rec.lock:
            return grid_document(rec.session)

    @app.post("/sessions/{session_id}/ops")
    def apply_op(session_id: str, body: dict):
        rec = get_record(session_id)
        if not isinstance(body, dict) or "op" not in body:
            raise OperatorError("operation descriptor must be an object with an 'op' field")
        with rec.lock:
            rec.session.apply(body)
            return grid_document(rec.session)

    @app.get("/sessions/{session_id}/sql")
    def sql(session_id: str):
        rec = get_record(session_id)
        with rec.lock:
            artifact = rec.session.sql()
        return {"sql": artifact.text, "kind": artifact.kind}

    static_root = static_dir or os.environ.get("BLENDCUBE_STATIC_DIR")
    if static_root is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_root = str(bundled) if bundled.is_dir() else None
    if static_root and Path(static_root).is_dir():
        app.mount("/", StaticFiles(directory=static_root, html=True), name="ui")

    return app
