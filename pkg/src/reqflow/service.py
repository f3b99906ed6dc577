"""HTTP facade over the requirements store.

A thin FastAPI application exposing item CRUD, review transitions, subset
derivation, the ipvs export, and report push-back. Every route delegates to
one store call; the store's own error hierarchy maps onto status codes
(validation 400, unknown id 404, duplicates and illegal transitions 409).
When constructed with a path, the store loads from it at startup and writes
back after every successful mutation.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from reqflow.configspec import ConfigError, parse_config
from reqflow.report import push_results
from reqflow.rmt.store import (
    DuplicateItemError,
    IllegalTransitionError,
    Relationship,
    RmtItem,
    RmtStore,
    UnknownItemError,
    ValidationError,
)


class ItemIn(BaseModel):
    id: str | None = None
    kind: str
    title: str
    text: str = ""
    domain: str | None = None
    applicability: str | None = None
    config_tag: str | None = None
    target: str | None = None


class ItemOut(BaseModel):
    id: str
    kind: str
    title: str
    text: str
    domain: str | None
    applicability: str | None
    state: str
    origin: str | None
    config_tag: str | None
    target: str | None
    status: str | None
    coverage_pct: float | None
    report_link: str | None
    history: tuple[str, ...]

    @classmethod
    def from_item(cls, item: RmtItem) -> "ItemOut":
        return cls(**{name: getattr(item, name) for name in cls.model_fields})


class RelationshipIn(BaseModel):
    from_id: str
    to_id: str
    kind: str


class StateIn(BaseModel):
    state: str


class ResultIn(BaseModel):
    status: str
    coverage_pct: float = Field(ge=0.0, le=100.0)
    report_link: str = ""


class DeriveIn(BaseModel):
    config: str


class DeriveOut(BaseModel):
    config_tag: str
    counts: dict[str, int]
    waiver_required: tuple[str, ...]
    skipped: tuple[str, ...]


class PushIn(BaseModel):
    xml: str


_ERROR_CODES = (
    (UnknownItemError, 404),
    (DuplicateItemError, 409),
    (IllegalTransitionError, 409),
    (ValidationError, 400),
    (ConfigError, 400),
)


def create_app(store_path: str | None = None,
               store: RmtStore | None = None) -> FastAPI:
    """Build the service around an existing store, a store file, or empty."""
    if store is None:
        if store_path and Path(store_path).exists():
            store = RmtStore.load(store_path)
        else:
            store = RmtStore()

    app = FastAPI(title="reqflow store")
    app.state.store = store
    app.state.store_path = store_path

    def persist() -> None:
        if store_path:
            store.save(store_path)

    for exc_type, code in _ERROR_CODES:
        def handler(request: Request, exc: Exception, code=code):
            return JSONResponse(status_code=code,
                                content={"detail": str(exc)})
        app.add_exception_handler(exc_type, handler)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "items": len(store.list_items())}

    @app.post("/items", status_code=201, response_model=ItemOut)
    def post_item(body: ItemIn):
        item = RmtItem(
            id=body.id or "", kind=body.kind, title=body.title,
            text=body.text, domain=body.domain,
            applicability=body.applicability, config_tag=body.config_tag,
            target=body.target)
        item_id = store.post_item(item)
        persist()
        return ItemOut.from_item(store.get_item(item_id))

    @app.get("/items", response_model=list[ItemOut])
    def list_items(kind: str | None = Query(default=None),
                   config_tag: str | None = Query(default=None)):
        return [ItemOut.from_item(i)
                for i in store.list_items(kind=kind, config_tag=config_tag)]

    @app.get("/items/{item_id}", response_model=ItemOut)
    def get_item(item_id: str):
        return ItemOut.from_item(store.get_item(item_id))

    @app.post("/relationships", status_code=201)
    def post_relationship(body: RelationshipIn):
        store.post_relationship(
            Relationship(body.from_id, body.to_id, body.kind))
        persist()
        return {"from_id": body.from_id, "to_id": body.to_id,
                "kind": body.kind}

    @app.post("/items/{item_id}/state", response_model=ItemOut)
    def set_state(item_id: str, body: StateIn):
        store.set_review_state(item_id, body.state)
        persist()
        return ItemOut.from_item(store.get_item(item_id))

    @app.post("/testcases/{item_id}/result", response_model=ItemOut)
    def set_result(item_id: str, body: ResultIn):
        store.update_test_status(item_id, body.status, body.coverage_pct,
                                 body.report_link)
        persist()
        return ItemOut.from_item(store.get_item(item_id))

    @app.post("/derive", response_model=DeriveOut)
    def derive(body: DeriveIn):
        cfg = parse_config(body.config)
        report = store.derive_subset(cfg)
        persist()
        return DeriveOut(config_tag=report.config_tag, counts=report.counts,
                         waiver_required=report.waiver_required,
                         skipped=report.skipped)

    @app.get("/export/ipvs")
    def export_ipvs(config_tag: str = Query()):
        text = store.export_ipvs(config_tag)
        return Response(content=text, media_type="application/xml")

    @app.post("/reports/push")
    def push(body: PushIn):
        applied = push_results(body.xml, store)
        persist()
        return {"applied": applied}

    return app
