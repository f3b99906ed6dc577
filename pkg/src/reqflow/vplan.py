"""Verification plan: built from an ipvs export, bound to run entities by
mapping patterns, and rolled up against session results.

Entity names are dot-separated: checks live under ``chk.<test>.<check>`` and
coverage bins under ``cov.<test>.<point>.<bin>``. A pattern segment ``*``
matches exactly one name segment; ``**`` matches one or more. Coverage is
kept as exact fractions until a report formats it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from reqflow.rmt.xmlio import parse_ipvs
from reqflow.xmlutil import XmlElement, render_document

ENTITY_ROOTS = ("chk", "cov")

# status aggregation order for hwrqs: worst wins
STATUS_RANK = {"fail": 0, "not_run": 1, "pass": 2}


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Rollup:
    status: str                 # pass | fail | not_run
    coverage: Fraction          # exact percentage
    matched_entities: int
    no_bins: bool = False       # coverage convention: no declared bin matched


@dataclass
class PlanItem:
    item_id: str
    title: str
    kind: str
    state: str
    patterns: list[str] = field(default_factory=list)
    default_mapped: bool = False
    rollup: Rollup | None = None


@dataclass
class VPlan:
    config_tag: str
    requirements: list[PlanItem] = field(default_factory=list)
    testcases: list[PlanItem] = field(default_factory=list)
    verifies: list[tuple[str, str]] = field(default_factory=list)  # tc -> hwrq
    waives: list[tuple[str, str]] = field(default_factory=list)    # wvr -> hwrq

    def items(self) -> list[PlanItem]:
        return self.requirements + self.testcases

    def find(self, item_id: str) -> PlanItem:
        for item in self.items():
            if item.item_id == item_id:
                return item
        raise PlanError(f"no plan item {item_id!r}")


def validate_pattern(pattern: str) -> list[str]:
    segments = pattern.split(".")
    if not pattern or not all(segments):
        raise PlanError(f"malformed pattern {pattern!r}: empty segment")
    for seg in segments:
        if "*" in seg and seg not in ("*", "**"):
            raise PlanError(
                f"malformed pattern {pattern!r}: wildcards must be whole segments")
        if any(ch.isspace() for ch in seg):
            raise PlanError(f"malformed pattern {pattern!r}: whitespace")
    return segments


def validate_entity(name: str) -> list[str]:
    segments = name.split(".")
    if len(segments) < 2 or not all(segments):
        raise PlanError(f"malformed entity name {name!r}")
    if segments[0] not in ENTITY_ROOTS:
        raise PlanError(f"entity name {name!r} outside chk/cov namespaces")
    return segments


def match(pattern: str, name: str) -> bool:
    """Segment-wise wildcard match: * is one segment, ** is one or more."""
    pat = validate_pattern(pattern)
    ent = validate_entity(name)

    # memo[i][j]: pat[i:] matches ent[j:]
    np, ne = len(pat), len(ent)
    memo = [[False] * (ne + 1) for _ in range(np + 1)]
    memo[np][ne] = True
    for i in range(np - 1, -1, -1):
        for j in range(ne, -1, -1):
            if j == ne:
                memo[i][j] = False
                continue
            if pat[i] == "**":
                memo[i][j] = memo[i + 1][j + 1] or memo[i][j + 1]
            elif pat[i] == "*" or pat[i] == ent[j]:
                memo[i][j] = memo[i + 1][j + 1]
    return memo[0][0]


def build_vplan(ipvs_text: str) -> VPlan:
    """One PlanItem per subset item, grouped by kind, sorted by id, with the
    default test mappings attached."""
    config_tag, items, rels = parse_ipvs(ipvs_text)
    plan = VPlan(config_tag=config_tag)
    seen = set()
    for item in sorted(items, key=lambda i: i.id):
        if item.id in seen:
            raise PlanError(f"duplicate item id {item.id!r} in ipvs document")
        seen.add(item.id)
        plan_item = PlanItem(item_id=item.id, title=item.title,
                             kind=item.kind, state=item.state)
        if item.kind == "testcase":
            plan_item.patterns = [f"chk.{item.id}.**", f"cov.{item.id}.**"]
            plan_item.default_mapped = True
            plan.testcases.append(plan_item)
        else:
            plan.requirements.append(plan_item)
    for rel in rels:
        if rel.kind == "verifies":
            plan.verifies.append((rel.from_id, rel.to_id))
        elif rel.kind == "waives":
            plan.waives.append((rel.from_id, rel.to_id))
    plan.verifies.sort()
    plan.waives.sort()
    return plan


def add_mapping_pattern(plan: VPlan, item_id: str, pattern: str) -> VPlan:
    """Append a pattern (set semantics). The first explicit pattern on a
    testcase replaces its default chk/cov mappings."""
    validate_pattern(pattern)
    item = plan.find(item_id)
    if item.default_mapped:
        item.patterns = []
        item.default_mapped = False
    if pattern not in item.patterns:
        item.patterns.append(pattern)
    return plan


def _fold_session(session) -> tuple[dict[str, bool], dict[str, int], set[str]]:
    checks: dict[str, bool] = {}
    hits: dict[str, int] = {}
    for run in sorted(session.runs, key=lambda r: (r.test, r.index)):
        for name, passed in run.checks:
            checks[name] = checks.get(name, True) and passed
        for name in run.bin_hits:
            hits[name] = hits.get(name, 0) + 1
    return checks, hits, set(session.declared_bins)


def rollup(plan: VPlan, session) -> VPlan:
    """Fill per-item rollups from a completed session.

    Testcase and waiver items match session entities directly through their
    patterns; hwrq items aggregate over their verifying testcases (worst
    status, mean coverage). Entities matching no plan item are counted into
    session.unmapped_entities.
    """
    checks, hits, declared = _fold_session(session)

    matched_anywhere: set[str] = set()
    for item in plan.testcases + [r for r in plan.requirements
                                  if r.kind == "waiver"]:
        matched_checks = [n for n in sorted(checks)
                          if any(match(p, n) for p in item.patterns)]
        matched_bins = [n for n in sorted(declared)
                        if any(match(p, n) for p in item.patterns)]
        matched_anywhere.update(matched_checks)
        matched_anywhere.update(matched_bins)
        if not matched_checks:
            status = "not_run"
        elif all(checks[n] for n in matched_checks):
            status = "pass"
        else:
            status = "fail"
        if matched_bins:
            hit = sum(1 for n in matched_bins if hits.get(n, 0) > 0)
            coverage = Fraction(100) * Fraction(hit, len(matched_bins))
            no_bins = False
        else:
            coverage = Fraction(100)
            no_bins = True
        item.rollup = Rollup(status=status, coverage=coverage,
                             matched_entities=len(matched_checks) + len(matched_bins),
                             no_bins=no_bins)

    # explicit patterns on requirement items have no rollup effect, but they
    # still claim entities for the unmapped count
    all_names = sorted(set(checks) | declared)
    for req in plan.requirements:
        for pattern in req.patterns:
            matched_anywhere.update(n for n in all_names if match(pattern, n))

    by_id = {item.item_id: item for item in plan.testcases}
    for req in plan.requirements:
        if req.kind != "hwrq":
            continue
        verifying = [by_id[tc] for tc, hw in plan.verifies
                     if hw == req.item_id and tc in by_id]
        if not verifying:
            req.rollup = Rollup(status="not_run", coverage=Fraction(0),
                                matched_entities=0)
            continue
        status = min((tc.rollup.status for tc in verifying),
                     key=STATUS_RANK.get)
        coverage = sum((tc.rollup.coverage for tc in verifying),
                       Fraction(0)) / len(verifying)
        req.rollup = Rollup(
            status=status, coverage=coverage,
            matched_entities=sum(tc.rollup.matched_entities for tc in verifying))

    session_entities = set(checks) | declared
    session.unmapped_entities = len(session_entities - matched_anywhere)
    return plan


def format_pct(value: Fraction) -> str:
    return f"{float(value):.1f}"


def render_vplan(plan: VPlan) -> str:
    """Deterministic XML serialization of the plan (ipvs vocabulary plus
    <map> and <rollup> children)."""
    root = XmlElement("vplan", {"config_tag": plan.config_tag})
    for section, items in (("Requirements", plan.requirements),
                           ("Testcases", plan.testcases)):
        sec = root.child("section", {"name": section})
        for item in items:
            el = sec.child("item", {"id": item.item_id, "kind": item.kind,
                                    "state": item.state})
            el.child("title", text=item.title)
            for pattern in sorted(item.patterns):
                el.child("map", {"pattern": pattern})
            if item.rollup is not None:
                attrs = {"status": item.rollup.status,
                         "coverage": format_pct(item.rollup.coverage),
                         "matched": str(item.rollup.matched_entities)}
                if item.rollup.no_bins:
                    attrs["no_bins"] = "true"
                el.child("rollup", attrs)
    for tc, hw in plan.verifies:
        root.child("rel", {"from": tc, "to": hw, "kind": "verifies"})
    for wv, hw in plan.waives:
        root.child("rel", {"from": wv, "to": hw, "kind": "waives"})
    return render_document(root)
