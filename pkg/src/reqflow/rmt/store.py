"""In-process requirements store.

Holds superset and configuration-specific subset items (hardware
requirements, testcases, waivers), typed relationships between them, and the
review state machine. Subset derivation evaluates each approved superset
item's applicability predicate against a configuration and materializes the
matching items under deterministic ids.

Superset items carry an applicability predicate and no origin; subset items
carry an origin and a config_tag. Waivers posted directly against a derived
requirement are the one exception: they have a config_tag and target but no
origin, so uncovered requirements can be waived after derivation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from reqflow.configspec import (
    IpConfiguration,
    PredicateError,
    eval_predicate,
    parse_predicate,
)

ITEM_KINDS = ("hwrq", "testcase", "waiver")
DOMAINS = ("simulation", "formal", "both")
STATES = ("draft", "in_review", "approved")
TEST_STATUSES = ("pass", "fail", "not_run")

# review state machine: the only legal transitions
TRANSITIONS = {
    ("draft", "in_review"),
    ("in_review", "approved"),
    ("in_review", "draft"),
}

REL_KINDS = ("verifies", "derived_from", "waives")

ID_PREFIXES = {"hwrq": "HWRQ-", "testcase": "TC-", "waiver": "WVR-"}


class RmtError(ValueError):
    pass


class ValidationError(RmtError):
    pass


class UnknownItemError(RmtError):
    pass


class DuplicateItemError(RmtError):
    pass


class IllegalTransitionError(RmtError):
    pass


@dataclass(frozen=True)
class RmtItem:
    id: str
    kind: str
    title: str
    text: str = ""
    domain: str | None = None          # testcases only
    applicability: str | None = None   # superset items only
    state: str = "draft"
    origin: str | None = None          # subset items: superset source id
    config_tag: str | None = None      # subset items: configuration hash
    target: str | None = None          # waivers: the hwrq being waived
    status: str | None = None          # subset testcases
    coverage_pct: float | None = None  # subset testcases
    report_link: str | None = None     # subset testcases
    history: tuple[str, ...] = ()      # review states this item has held

    @property
    def is_superset(self) -> bool:
        return self.config_tag is None


@dataclass(frozen=True)
class Relationship:
    from_id: str
    to_id: str
    kind: str


@dataclass(frozen=True)
class SubsetReport:
    config_tag: str
    counts: dict[str, int] = field(default_factory=dict)
    waiver_required: tuple[str, ...] = ()
    skipped: tuple[str, ...] = ()


class RmtStore:
    """Single-writer store; every public method takes the store lock so
    callers always observe a consistent snapshot."""

    def __init__(self):
        self._items: dict[str, RmtItem] = {}
        self._rels: list[Relationship] = []
        self._lock = threading.RLock()

    # ------------------------------------------------------------------
    # items

    def post_item(self, item: RmtItem) -> str:
        with self._lock:
            if item.state != "draft":
                raise ValidationError("new items enter review in draft state")
            if item.status is not None or item.coverage_pct is not None:
                raise ValidationError(
                    "test results are set through update_test_status")
            item = replace(item, history=("draft",))
            self._validate_shape(item)
            item_id = item.id.strip() if item.id else ""
            if not item_id:
                item_id = self._next_id(item.kind, item.config_tag)
                item = replace(item, id=item_id)
            if item_id in self._items:
                raise DuplicateItemError(f"duplicate id {item_id!r}")
            self._insert(item)
            return item_id

    def _validate_shape(self, item: RmtItem) -> None:
        if item.kind not in ITEM_KINDS:
            raise ValidationError(f"unknown item kind {item.kind!r}")
        if not item.title.strip():
            raise ValidationError("item title must not be empty")
        if item.state not in STATES:
            raise ValidationError(f"unknown state {item.state!r}")
        if item.kind == "testcase":
            if item.domain not in DOMAINS:
                raise ValidationError(
                    f"testcase domain must be one of {DOMAINS}")
        elif item.domain is not None:
            raise ValidationError("only testcases carry a domain")
        if item.kind == "waiver":
            if not item.target:
                raise ValidationError("waiver needs a target hwrq id")
            target = self._items.get(item.target)
            if target is None:
                raise UnknownItemError(f"waiver target {item.target!r} not found")
            if target.kind != "hwrq":
                raise ValidationError("waiver target must be an hwrq")
            if target.config_tag != item.config_tag:
                raise ValidationError(
                    "waiver and its target belong to different scopes")
        elif item.target is not None:
            raise ValidationError("only waivers carry a target")
        if item.config_tag is None:
            # superset item
            if item.applicability is None:
                raise ValidationError("superset items need an applicability predicate")
            if item.origin is not None:
                raise ValidationError("superset items cannot have an origin")
            try:
                parse_predicate(item.applicability)
            except PredicateError as exc:
                raise ValidationError(f"bad applicability: {exc}") from exc
        else:
            if item.applicability is not None:
                raise ValidationError("subset items cannot carry a predicate")
            if item.origin is None and item.kind != "waiver":
                raise ValidationError("subset items need an origin")
            if item.origin is not None and item.origin not in self._items:
                raise UnknownItemError(f"origin {item.origin!r} not found")

    def _insert(self, item: RmtItem) -> None:
        self._items[item.id] = item
        if item.kind == "waiver" and item.target:
            self._add_rel(Relationship(item.id, item.target, "waives"))

    def _next_id(self, kind: str, config_tag: str | None) -> str:
        prefix = ID_PREFIXES[kind]
        if config_tag is not None:
            prefix = f"{config_tag}-{prefix}"
        best = 0
        for item_id in self._items:
            if item_id.startswith(prefix) and item_id[len(prefix):].isdigit():
                best = max(best, int(item_id[len(prefix):]))
        return f"{prefix}{best + 1:03d}"

    def get_item(self, item_id: str) -> RmtItem:
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownItemError(f"no item {item_id!r}")
            return item

    def list_items(self, kind: str | None = None,
                   config_tag: str | None = None) -> list[RmtItem]:
        with self._lock:
            items = [i for i in self._items.values()
                     if (kind is None or i.kind == kind)
                     and (config_tag is None or i.config_tag == config_tag)]
            return sorted(items, key=lambda i: i.id)

    # ------------------------------------------------------------------
    # relationships

    def post_relationship(self, rel: Relationship) -> None:
        with self._lock:
            if rel.kind not in REL_KINDS:
                raise ValidationError(f"unknown relationship kind {rel.kind!r}")
            src = self._items.get(rel.from_id)
            dst = self._items.get(rel.to_id)
            if src is None or dst is None:
                missing = rel.from_id if src is None else rel.to_id
                raise UnknownItemError(f"relationship endpoint {missing!r} not found")
            if rel.kind == "verifies" and (src.kind, dst.kind) != ("testcase", "hwrq"):
                raise ValidationError("verifies goes testcase -> hwrq")
            if rel.kind == "waives" and (src.kind, dst.kind) != ("waiver", "hwrq"):
                raise ValidationError("waives goes waiver -> hwrq")
            if rel.kind == "derived_from":
                if src.kind != dst.kind:
                    raise ValidationError("derived_from links items of one kind")
                if src.origin != dst.id:
                    raise ValidationError("derived_from must match the origin field")
            self._add_rel(rel)

    def _add_rel(self, rel: Relationship) -> None:
        if rel not in self._rels:
            self._rels.append(rel)

    def relationships(self, kind: str | None = None) -> list[Relationship]:
        with self._lock:
            rels = [r for r in self._rels if kind is None or r.kind == kind]
            return sorted(rels, key=lambda r: (r.from_id, r.to_id, r.kind))

    # ------------------------------------------------------------------
    # review state machine

    def set_review_state(self, item_id: str, new_state: str) -> None:
        with self._lock:
            item = self.get_item(item_id)
            if new_state not in STATES:
                raise ValidationError(f"unknown state {new_state!r}")
            if (item.state, new_state) not in TRANSITIONS:
                raise IllegalTransitionError(
                    f"illegal transition {item.state} -> {new_state}")
            self._items[item_id] = replace(
                item, state=new_state, history=item.history + (new_state,))

    # ------------------------------------------------------------------
    # test results

    def update_test_status(self, item_id: str, status: str,
                           coverage_pct: float, report_link: str) -> None:
        with self._lock:
            item = self.get_item(item_id)
            if item.kind != "testcase" or item.config_tag is None:
                raise ValidationError(f"{item_id} is not a subset testcase")
            if status not in TEST_STATUSES:
                raise ValidationError(f"unknown test status {status!r}")
            coverage = float(coverage_pct)
            if not 0.0 <= coverage <= 100.0:
                raise ValidationError("coverage must be within 0..100")
            self._items[item_id] = replace(
                item, status=status, coverage_pct=coverage,
                report_link=report_link)

    # ------------------------------------------------------------------
    # subset derivation

    def derive_subset(self, cfg: IpConfiguration) -> SubsetReport:
        tag = cfg.config_tag()
        with self._lock:
            superset = [i for i in self.list_items() if i.is_superset]
            approved = [i for i in superset if i.state == "approved"]
            if not approved:
                raise ValidationError("store has no approved superset items")

            applicable: dict[str, RmtItem] = {}
            skipped: list[str] = []
            for item in approved:
                try:
                    pred = parse_predicate(item.applicability)
                except PredicateError as exc:
                    raise RmtError(f"corrupt predicate on {item.id}: {exc}") from exc
                if eval_predicate(pred, cfg):
                    applicable[item.id] = item
                else:
                    skipped.append(item.id)

            # waivers only derive when their target requirement does
            derived_ids = {origin: f"{tag}-{origin}" for origin in applicable}
            for origin, item in list(applicable.items()):
                if item.kind == "waiver" and item.target not in derived_ids:
                    del applicable[origin]
                    skipped.append(origin)

            counts = {"hwrq": 0, "testcase": 0, "waiver": 0}
            for origin in sorted(applicable):
                item = applicable[origin]
                counts[item.kind] += 1
                new_id = derived_ids[origin]
                if new_id in self._items:
                    continue  # idempotent re-derivation keeps run results
                derived = RmtItem(
                    id=new_id, kind=item.kind, title=item.title,
                    text=item.text, domain=item.domain, state="approved",
                    origin=origin, config_tag=tag,
                    target=derived_ids[item.target] if item.target else None,
                    status="not_run" if item.kind == "testcase" else None,
                    coverage_pct=0.0 if item.kind == "testcase" else None,
                    report_link="" if item.kind == "testcase" else None,
                    history=("approved",))
                self._insert(derived)
                self._add_rel(Relationship(new_id, origin, "derived_from"))

            for rel in self.relationships("verifies"):
                if rel.from_id in derived_ids and rel.to_id in derived_ids:
                    self._add_rel(Relationship(derived_ids[rel.from_id],
                                               derived_ids[rel.to_id],
                                               "verifies"))

            waiver_required = []
            verified = {r.to_id for r in self.relationships("verifies")}
            for origin in sorted(applicable):
                if applicable[origin].kind != "hwrq":
                    continue
                derived_id = derived_ids[origin]
                if derived_id not in verified:
                    waiver_required.append(derived_id)

            return SubsetReport(config_tag=tag, counts=counts,
                                waiver_required=tuple(waiver_required),
                                skipped=tuple(sorted(skipped)))

    # ------------------------------------------------------------------
    # export and persistence (serialization lives in xmlio)

    def export_ipvs(self, config_tag: str) -> str:
        from reqflow.rmt.xmlio import render_ipvs
        with self._lock:
            items = self.list_items(config_tag=config_tag)
            if not items:
                raise UnknownItemError(f"no subset for config_tag {config_tag!r}")
            ids = {i.id for i in items}
            rels = [r for r in self.relationships()
                    if r.from_id in ids and r.to_id in ids]
            return render_ipvs(config_tag, items, rels)

    def save(self, path: str) -> None:
        from reqflow.rmt.xmlio import save_store
        with self._lock:
            save_store(self, path)

    @classmethod
    def load(cls, path: str) -> "RmtStore":
        from reqflow.rmt.xmlio import load_store
        return load_store(path)

    def snapshot(self) -> tuple[list[RmtItem], list[Relationship]]:
        with self._lock:
            return self.list_items(), self.relationships()
