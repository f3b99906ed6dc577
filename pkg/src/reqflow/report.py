"""Report emission and the write-back that closes the traceability loop.

The HTML plan report and the XML results report are both pure functions of
a rolled-up plan, carry no timestamps unless a stamp is passed in, and
serialize deterministically so re-emission is byte-identical. The archive
is a local directory addressed by ``file:`` URIs.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from pathlib import Path

from reqflow.rmt.store import TEST_STATUSES, RmtStore, ValidationError
from reqflow.vplan import PlanError, VPlan, format_pct
from reqflow.xmlutil import XmlElement, escape_attr, escape_text, render_document

_CSS = (
    "body{font-family:sans-serif;margin:1.5em}"
    "table{border-collapse:collapse;width:100%}"
    "th,td{border:1px solid #999;padding:0.3em 0.6em;text-align:left}"
    "th{background:#eee}"
    "tr.fail td{background:#fdd}"
    "tr.not_run td{background:#ffd}"
    ".totals{color:#333}"
)


def _require_rollups(plan: VPlan) -> None:
    for item in plan.items():
        if item.rollup is None:
            raise PlanError(f"plan item {item.item_id} has no rollup yet")


def _count(plan: VPlan, status: str) -> int:
    return sum(1 for item in plan.items() if item.rollup.status == status)


def emit_vplan_html(
    plan: VPlan,
    unmapped_entities: int | None = None,
    stamp: str | None = None,
) -> str:
    """Render the rolled-up plan as a static HTML document.

    One table row per plan item, with the row's element id equal to the
    item id. Emission is deterministic; a stamp line appears only when the
    caller passes one.
    """
    _require_rollups(plan)
    out = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8"/>',
        f"<title>vPlan {escape_text(plan.config_tag)}</title>",
        f"<style>{_CSS}</style>",
        "</head>",
        "<body>",
        f"<h1>Verification plan {escape_text(plan.config_tag)}</h1>",
    ]
    totals = (
        f"items: {len(plan.items())} | "
        f"requirements: {sum(1 for i in plan.requirements if i.kind == 'hwrq')} | "
        f"waivers: {sum(1 for i in plan.requirements if i.kind == 'waiver')} | "
        f"testcases: {len(plan.testcases)} | "
        f"pass: {_count(plan, 'pass')} | "
        f"fail: {_count(plan, 'fail')} | "
        f"not run: {_count(plan, 'not_run')}"
    )
    if unmapped_entities is not None:
        totals += f" | unmapped entities: {unmapped_entities}"
    out.append(f'<p class="totals">{escape_text(totals)}</p>')
    if stamp is not None:
        out.append(f'<p class="stamp">{escape_text(stamp)}</p>')
    for heading, items in (
        ("Requirements", plan.requirements),
        ("Testcases", plan.testcases),
    ):
        out.append(f"<h2>{heading}</h2>")
        out.append("<table>")
        out.append(
            "<tr><th>id</th><th>kind</th><th>title</th><th>state</th>"
            "<th>status</th><th>coverage</th><th>mappings</th></tr>"
        )
        for item in items:
            rollup = item.rollup
            coverage = format_pct(rollup.coverage)
            if rollup.no_bins:
                coverage += " (no bins)"
            cells = "".join(
                f"<td>{escape_text(text)}</td>"
                for text in (
                    item.item_id,
                    item.kind,
                    item.title,
                    item.state,
                    rollup.status,
                    coverage,
                    " ".join(sorted(item.patterns)),
                )
            )
            out.append(
                f'<tr id="{escape_attr(item.item_id)}" '
                f'class="{escape_attr(rollup.status)}">{cells}</tr>'
            )
        out.append("</table>")
    out.append("</body>")
    out.append("</html>")
    return "\n".join(out) + "\n"


def archive_report(
    html: str, archive_dir: str, config_tag: str, session: str
) -> str:
    """Store the HTML under <archive_dir>/<config_tag>/<session>/vplan.html
    and return the file: URI. Re-archiving overwrites in place."""
    target = Path(archive_dir) / config_tag / session
    target.mkdir(parents=True, exist_ok=True)
    path = target / "vplan.html"
    tmp = path.with_suffix(".html.tmp")
    tmp.write_text(html, encoding="utf-8")
    os.replace(tmp, path)
    return path.resolve().as_uri()


def emit_rmt_xml(plan: VPlan, session: str, archive: str) -> str:
    """Render the results report: one row per testcase and per requirement,
    sorted by id, coverage to one decimal place, archive link on the root.

    A requirement row is blocking when nothing verifies it and no approved
    waiver covers it.
    """
    _require_rollups(plan)
    if not archive:
        raise ValidationError("archive link must be non-empty")
    root = XmlElement(
        "rmt-report",
        {"session": session, "config_tag": plan.config_tag, "archive": archive},
    )
    for item in sorted(plan.testcases, key=lambda i: i.item_id):
        root.child(
            "testcase",
            {
                "id": item.item_id,
                "status": item.rollup.status,
                "coverage": format_pct(item.rollup.coverage),
            },
        )
    verified = {hw for _, hw in plan.verifies}
    waived = set()
    waiver_state = {
        item.item_id: item.state
        for item in plan.requirements
        if item.kind == "waiver"
    }
    for wv, hw in plan.waives:
        if waiver_state.get(wv) == "approved":
            waived.add(hw)
    for item in sorted(plan.requirements, key=lambda i: i.item_id):
        if item.kind != "hwrq":
            continue
        blocking = item.item_id not in verified and item.item_id not in waived
        root.child(
            "hwrq",
            {
                "id": item.item_id,
                "status": item.rollup.status,
                "blocking": "true" if blocking else "false",
            },
        )
    return render_document(root)


def push_results(xml_text: str, store: RmtStore) -> int:
    """Apply every testcase row of a results report to the store.

    All rows are validated before any is applied, so an unknown id or a bad
    row leaves the store untouched. The archive link lands in each
    testcase's report link field. Returns the number of rows applied;
    re-pushing the same report is a no-op on store state.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise ValidationError(f"bad results report: {exc}") from exc
    if root.tag != "rmt-report":
        raise ValidationError(f"unexpected root element {root.tag!r}")
    link = root.get("archive", "")
    rows = []
    for el in root:
        if el.tag != "testcase":
            continue
        item_id = el.get("id", "")
        status = el.get("status", "")
        try:
            coverage = float(el.get("coverage", ""))
        except ValueError:
            raise ValidationError(f"row {item_id}: bad coverage") from None
        rows.append((item_id, status, coverage))

    for item_id, status, coverage in rows:
        item = store.get_item(item_id)  # unknown id rejects the whole push
        if item.kind != "testcase" or item.config_tag is None:
            raise ValidationError(f"row {item_id} is not a subset testcase")
        if status not in TEST_STATUSES:
            raise ValidationError(f"row {item_id}: unknown status {status!r}")
        if not 0.0 <= coverage <= 100.0:
            raise ValidationError(f"row {item_id}: coverage out of range")

    for item_id, status, coverage in rows:
        store.update_test_status(item_id, status, coverage, link)
    return len(rows)
