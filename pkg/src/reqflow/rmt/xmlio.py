"""XML serialization for the requirements store.

Two documents share the element vocabulary: the ipvs export (the subset view
consumed by plan generation) and the full persistence file. Both are emitted
through the deterministic writer so repeated exports are byte-identical.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET

from reqflow.rmt.store import Relationship, RmtItem, RmtStore
from reqflow.xmlutil import XmlElement, render_document


def format_coverage(value: float) -> str:
    return repr(float(value))


def render_ipvs(config_tag: str, items: list[RmtItem],
                rels: list[Relationship]) -> str:
    root = XmlElement("ipvs", {"config_tag": config_tag})
    for item in sorted(items, key=lambda i: i.id):
        attrs = {"id": item.id, "kind": item.kind, "state": item.state}
        if item.domain is not None:
            attrs["domain"] = item.domain
        if item.origin is not None:
            attrs["origin"] = item.origin
        el = root.child("item", attrs)
        el.child("title", text=item.title)
        el.child("text", text=item.text)
        if item.kind == "testcase":
            el.child("status", text=item.status or "not_run")
            el.child("coverage", text=format_coverage(item.coverage_pct or 0.0))
    for rel in sorted(rels, key=lambda r: (r.from_id, r.to_id, r.kind)):
        root.child("rel", {"from": rel.from_id, "to": rel.to_id,
                           "kind": rel.kind})
    return render_document(root)


def parse_ipvs(text: str) -> tuple[str, list[RmtItem], list[Relationship]]:
    """Read an ipvs document back into item/relationship values."""
    root = ET.fromstring(text)
    if root.tag != "ipvs":
        raise ValueError(f"expected <ipvs> root, got <{root.tag}>")
    config_tag = root.get("config_tag", "")
    items = []
    rels = []
    for el in root:
        if el.tag == "item":
            status = el.findtext("status")
            coverage = el.findtext("coverage")
            items.append(RmtItem(
                id=el.get("id", ""),
                kind=el.get("kind", ""),
                title=el.findtext("title") or "",
                text=el.findtext("text") or "",
                domain=el.get("domain"),
                state=el.get("state", "draft"),
                origin=el.get("origin"),
                config_tag=config_tag,
                status=status,
                coverage_pct=float(coverage) if coverage is not None else None,
            ))
        elif el.tag == "rel":
            rels.append(Relationship(el.get("from", ""), el.get("to", ""),
                                     el.get("kind", "")))
        else:
            raise ValueError(f"unexpected element <{el.tag}> in ipvs document")
    return config_tag, items, rels


def render_store(items: list[RmtItem], rels: list[Relationship]) -> str:
    root = XmlElement("rmt-store")
    for item in sorted(items, key=lambda i: i.id):
        attrs = {"id": item.id, "kind": item.kind, "state": item.state}
        for key, value in (("domain", item.domain), ("origin", item.origin),
                           ("config_tag", item.config_tag),
                           ("target", item.target)):
            if value is not None:
                attrs[key] = value
        if item.history:
            attrs["history"] = ",".join(item.history)
        el = root.child("item", attrs)
        el.child("title", text=item.title)
        el.child("text", text=item.text)
        if item.applicability is not None:
            el.child("applicability", text=item.applicability)
        if item.status is not None:
            el.child("status", text=item.status)
        if item.coverage_pct is not None:
            el.child("coverage", text=format_coverage(item.coverage_pct))
        if item.report_link is not None:
            el.child("link", text=item.report_link)
    for rel in sorted(rels, key=lambda r: (r.from_id, r.to_id, r.kind)):
        root.child("rel", {"from": rel.from_id, "to": rel.to_id,
                           "kind": rel.kind})
    return render_document(root)


def save_store(store: RmtStore, path: str) -> None:
    items, rels = store.snapshot()
    text = render_store(items, rels)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_store(path: str) -> RmtStore:
    with open(path, encoding="utf-8") as fh:
        root = ET.fromstring(fh.read())
    if root.tag != "rmt-store":
        raise ValueError(f"expected <rmt-store> root, got <{root.tag}>")
    store = RmtStore()
    for el in root:
        if el.tag == "item":
            history = el.get("history", "")
            coverage = el.findtext("coverage")
            item = RmtItem(
                id=el.get("id", ""),
                kind=el.get("kind", ""),
                title=el.findtext("title") or "",
                text=el.findtext("text") or "",
                domain=el.get("domain"),
                applicability=el.findtext("applicability"),
                state=el.get("state", "draft"),
                origin=el.get("origin"),
                config_tag=el.get("config_tag"),
                target=el.get("target"),
                status=el.findtext("status"),
                coverage_pct=float(coverage) if coverage is not None else None,
                report_link=el.findtext("link"),
                history=tuple(history.split(",")) if history else (),
            )
            store._items[item.id] = item
        elif el.tag == "rel":
            store._rels.append(Relationship(el.get("from", ""),
                                            el.get("to", ""),
                                            el.get("kind", "")))
        else:
            raise ValueError(f"unexpected element <{el.tag}> in store file")
    return store
