"""Typed HTTP client for the store service.

Mirrors the store API over HTTP and translates error responses back into
the store's exception types, so callers can swap a local RmtStore for a
remote one without changing their error handling. Tests inject an httpx
client bound to an in-process ASGI transport.
"""

from __future__ import annotations

import httpx

from reqflow.rmt.store import (
    DuplicateItemError,
    IllegalTransitionError,
    RmtError,
    UnknownItemError,
    ValidationError,
)


class StoreClient:
    def __init__(self, base_url: str = "", client: httpx.Client | None = None):
        if client is None:
            client = httpx.Client(base_url=base_url, timeout=30.0)
        self._http = client

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "StoreClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _check(self, response: httpx.Response) -> httpx.Response:
        if response.is_success:
            return response
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        if response.status_code == 404:
            raise UnknownItemError(detail)
        if response.status_code == 409:
            if "transition" in detail:
                raise IllegalTransitionError(detail)
            raise DuplicateItemError(detail)
        if response.status_code in (400, 422):
            raise ValidationError(detail)
        raise RmtError(f"{response.status_code}: {detail}")

    def healthz(self) -> dict:
        return self._check(self._http.get("/healthz")).json()

    def post_item(self, **fields) -> dict:
        return self._check(self._http.post("/items", json=fields)).json()

    def get_item(self, item_id: str) -> dict:
        return self._check(self._http.get(f"/items/{item_id}")).json()

    def list_items(self, kind: str | None = None,
                   config_tag: str | None = None) -> list[dict]:
        params = {}
        if kind is not None:
            params["kind"] = kind
        if config_tag is not None:
            params["config_tag"] = config_tag
        return self._check(self._http.get("/items", params=params)).json()

    def post_relationship(self, from_id: str, to_id: str, kind: str) -> dict:
        body = {"from_id": from_id, "to_id": to_id, "kind": kind}
        return self._check(self._http.post("/relationships", json=body)).json()

    def set_review_state(self, item_id: str, state: str) -> dict:
        return self._check(
            self._http.post(f"/items/{item_id}/state",
                            json={"state": state})).json()

    def update_test_status(self, item_id: str, status: str,
                           coverage_pct: float,
                           report_link: str = "") -> dict:
        body = {"status": status, "coverage_pct": coverage_pct,
                "report_link": report_link}
        return self._check(
            self._http.post(f"/testcases/{item_id}/result", json=body)).json()

    def derive(self, config_text: str) -> dict:
        return self._check(
            self._http.post("/derive", json={"config": config_text})).json()

    def export_ipvs(self, config_tag: str) -> str:
        response = self._check(
            self._http.get("/export/ipvs", params={"config_tag": config_tag}))
        return response.text

    def push_report(self, xml: str) -> int:
        response = self._check(
            self._http.post("/reports/push", json={"xml": xml}))
        return response.json()["applied"]
