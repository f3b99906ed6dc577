"""Requirements store tests: posting, relationships, review state machine,
subset derivation, ipvs export, and persistence."""

import itertools
import threading

import pytest

from reqflow.configspec import eval_predicate, parse_config, parse_predicate
from reqflow.rmt import (
    DuplicateItemError,
    IllegalTransitionError,
    Relationship,
    RmtItem,
    RmtStore,
    UnknownItemError,
    ValidationError,
)
from reqflow.rmt.xmlio import parse_ipvs


def cfg_text(ecc="secded", lp="retention, shutdown"):
    lines = [
        "ip_name = mem0",
        "data_width = 8",
        "addr_words = 64",
        f"ecc = {ecc}",
        "tech = sram_hd",
    ]
    if lp:
        lines.append(f"lp_modes = {lp}")
    return "\n".join(lines) + "\n"


def approve(store, item_id):
    store.set_review_state(item_id, "in_review")
    store.set_review_state(item_id, "approved")


def small_superset(store):
    """Two hwrqs, two testcases, one waiver; everything approved."""
    ids = {}
    ids["h_ecc"] = store.post_item(RmtItem(
        id="", kind="hwrq", title="Single faults are corrected",
        text="ecc body", applicability="ecc >= secded"))
    ids["h_bus"] = store.post_item(RmtItem(
        id="", kind="hwrq", title="Bursts decode correctly",
        text="bus body", applicability="true"))
    ids["t_ecc"] = store.post_item(RmtItem(
        id="", kind="testcase", title="ecc exhaustive", text="",
        domain="formal", applicability="ecc >= secded"))
    ids["t_bus"] = store.post_item(RmtItem(
        id="", kind="testcase", title="bus decode sweep", text="",
        domain="formal", applicability="true"))
    ids["waiver"] = store.post_item(RmtItem(
        id="", kind="waiver", title="Bus hwrq waived on rram",
        text="", applicability='tech == rram', target=ids["h_bus"]))
    store.post_relationship(Relationship(ids["t_ecc"], ids["h_ecc"], "verifies"))
    store.post_relationship(Relationship(ids["t_bus"], ids["h_bus"], "verifies"))
    for item_id in ids.values():
        approve(store, item_id)
    return ids


def test_id_scheme_counts_per_kind():
    store = RmtStore()
    assert store.post_item(RmtItem(
        id="", kind="hwrq", title="a", applicability="true")) == "HWRQ-001"
    assert store.post_item(RmtItem(
        id="", kind="hwrq", title="b", applicability="true")) == "HWRQ-002"
    assert store.post_item(RmtItem(
        id="", kind="testcase", title="c", domain="both",
        applicability="true")) == "TC-001"
    assert store.post_item(RmtItem(
        id="", kind="waiver", title="d", applicability="true",
        target="HWRQ-001")) == "WVR-001"


def test_explicit_id_and_duplicate_rejection():
    store = RmtStore()
    store.post_item(RmtItem(id="HWRQ-900", kind="hwrq", title="x",
                            applicability="true"))
    assert store.get_item("HWRQ-900").title == "x"
    with pytest.raises(DuplicateItemError):
        store.post_item(RmtItem(id="HWRQ-900", kind="hwrq", title="y",
                                applicability="true"))


@pytest.mark.parametrize("item", [
    RmtItem(id="", kind="rfc", title="t", applicability="true"),
    RmtItem(id="", kind="hwrq", title="  ", applicability="true"),
    RmtItem(id="", kind="hwrq", title="t"),                      # no predicate
    RmtItem(id="", kind="hwrq", title="t", applicability="ecc >"),
    RmtItem(id="", kind="hwrq", title="t", applicability="true",
            origin="HWRQ-001"),
    RmtItem(id="", kind="hwrq", title="t", applicability="true",
            domain="formal"),
    RmtItem(id="", kind="testcase", title="t", applicability="true"),
    RmtItem(id="", kind="testcase", title="t", domain="fuzz",
            applicability="true"),
    RmtItem(id="", kind="hwrq", title="t", applicability="true",
            state="approved"),
    RmtItem(id="", kind="waiver", title="t", applicability="true"),
    RmtItem(id="", kind="hwrq", title="t", applicability="true",
            target="HWRQ-001"),
    RmtItem(id="", kind="hwrq", title="t", applicability="true",
            status="pass"),
    RmtItem(id="", kind="testcase", title="t", domain="both",
            config_tag="0" * 16),                                # no origin
])
def test_malformed_items_rejected(item):
    store = RmtStore()
    with pytest.raises(ValidationError):
        store.post_item(item)


def test_waiver_target_must_be_a_known_hwrq():
    store = RmtStore()
    tc = store.post_item(RmtItem(id="", kind="testcase", title="t",
                                 domain="both", applicability="true"))
    with pytest.raises(UnknownItemError):
        store.post_item(RmtItem(id="", kind="waiver", title="w",
                                applicability="true", target="HWRQ-404"))
    with pytest.raises(ValidationError):
        store.post_item(RmtItem(id="", kind="waiver", title="w",
                                applicability="true", target=tc))


def test_waiver_post_creates_waives_relationship():
    store = RmtStore()
    hwrq = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                   applicability="true"))
    waiver = store.post_item(RmtItem(id="", kind="waiver", title="w",
                                     applicability="true", target=hwrq))
    assert store.relationships("waives") == [
        Relationship(waiver, hwrq, "waives")]


def test_relationship_direction_and_endpoints():
    store = RmtStore()
    hwrq = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                   applicability="true"))
    tc = store.post_item(RmtItem(id="", kind="testcase", title="t",
                                 domain="both", applicability="true"))
    store.post_relationship(Relationship(tc, hwrq, "verifies"))
    with pytest.raises(ValidationError):
        store.post_relationship(Relationship(hwrq, tc, "verifies"))
    with pytest.raises(UnknownItemError):
        store.post_relationship(Relationship(tc, "HWRQ-404", "verifies"))
    with pytest.raises(ValidationError):
        store.post_relationship(Relationship(tc, hwrq, "contradicts"))


def test_duplicate_relationship_stored_once():
    store = RmtStore()
    hwrq = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                   applicability="true"))
    tc = store.post_item(RmtItem(id="", kind="testcase", title="t",
                                 domain="both", applicability="true"))
    rel = Relationship(tc, hwrq, "verifies")
    store.post_relationship(rel)
    store.post_relationship(rel)
    assert store.relationships("verifies") == [rel]


def test_review_state_machine_exhaustive():
    legal = {("draft", "in_review"), ("in_review", "approved"),
             ("in_review", "draft")}
    for start, new in itertools.product(["draft", "in_review", "approved"],
                                        repeat=2):
        store = RmtStore()
        item_id = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                          applicability="true"))
        if start == "in_review":
            store.set_review_state(item_id, "in_review")
        elif start == "approved":
            store.set_review_state(item_id, "in_review")
            store.set_review_state(item_id, "approved")
        if (start, new) in legal:
            store.set_review_state(item_id, new)
            assert store.get_item(item_id).state == new
        else:
            with pytest.raises(IllegalTransitionError):
                store.set_review_state(item_id, new)
            assert store.get_item(item_id).state == start


def test_review_history_recorded():
    store = RmtStore()
    item_id = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                      applicability="true"))
    store.set_review_state(item_id, "in_review")
    store.set_review_state(item_id, "draft")
    store.set_review_state(item_id, "in_review")
    store.set_review_state(item_id, "approved")
    assert store.get_item(item_id).history == (
        "draft", "in_review", "draft", "in_review", "approved")


def test_set_state_unknowns():
    store = RmtStore()
    with pytest.raises(UnknownItemError):
        store.set_review_state("HWRQ-404", "in_review")
    item_id = store.post_item(RmtItem(id="", kind="hwrq", title="h",
                                      applicability="true"))
    with pytest.raises(ValidationError):
        store.set_review_state(item_id, "shipped")


def test_update_test_status_rules():
    store = RmtStore()
    ids = small_superset(store)
    cfg = parse_config(cfg_text())
    report = store.derive_subset(cfg)
    tag = report.config_tag
    sub_tc = f"{tag}-{ids['t_ecc']}"

    store.update_test_status(sub_tc, "fail", 37.5, "file:///a.html")
    item = store.get_item(sub_tc)
    assert (item.status, item.coverage_pct, item.report_link) == (
        "fail", 37.5, "file:///a.html")

    with pytest.raises(ValidationError):
        store.update_test_status(f"{tag}-{ids['h_ecc']}", "pass", 100, "x")
    with pytest.raises(ValidationError):
        store.update_test_status(ids["t_ecc"], "pass", 100, "x")  # superset tc
    with pytest.raises(UnknownItemError):
        store.update_test_status("TC-404", "pass", 100, "x")
    with pytest.raises(ValidationError):
        store.update_test_status(sub_tc, "flaky", 100, "x")
    with pytest.raises(ValidationError):
        store.update_test_status(sub_tc, "pass", 101, "x")


def test_derive_requires_approved_superset():
    store = RmtStore()
    with pytest.raises(ValidationError):
        store.derive_subset(parse_config(cfg_text()))
    store.post_item(RmtItem(id="", kind="hwrq", title="h",
                            applicability="true"))  # stays draft
    with pytest.raises(ValidationError):
        store.derive_subset(parse_config(cfg_text()))


def test_draft_items_do_not_derive():
    store = RmtStore()
    ids = small_superset(store)
    extra = store.post_item(RmtItem(id="", kind="hwrq", title="draft only",
                                    applicability="true"))
    report = store.derive_subset(parse_config(cfg_text()))
    assert f"{report.config_tag}-{extra}" not in [
        i.id for i in store.list_items(config_tag=report.config_tag)]
    assert report.counts["hwrq"] == 2
    assert ids  # superset intact


def test_derivation_matches_independent_predicate_scan():
    store = RmtStore()
    small_superset(store)
    for ecc in ("none", "sed", "secded", "dected"):
        cfg = parse_config(cfg_text(ecc=ecc))
        report = store.derive_subset(cfg)
        superset = [i for i in store.list_items() if i.is_superset
                    and i.state == "approved"]
        expected = {i.id for i in superset
                    if eval_predicate(parse_predicate(i.applicability), cfg)}
        # waivers additionally need their target in the subset
        for item in superset:
            if item.kind == "waiver" and item.id in expected:
                if item.target not in expected:
                    expected.discard(item.id)
        derived = {i.origin for i in store.list_items(
            config_tag=report.config_tag) if i.origin}
        assert derived == expected
        assert set(report.skipped) == {i.id for i in superset} - expected


def test_derive_is_idempotent_and_keeps_results():
    store = RmtStore()
    ids = small_superset(store)
    cfg = parse_config(cfg_text())
    first = store.derive_subset(cfg)
    tag = first.config_tag
    store.update_test_status(f"{tag}-{ids['t_bus']}", "pass", 100.0, "link")
    export_before = store.export_ipvs(tag)
    second = store.derive_subset(cfg)
    assert second == first
    assert store.export_ipvs(tag) == export_before


def test_uncovered_hwrq_listed_waiver_required():
    store = RmtStore()
    store.post_item(RmtItem(id="", kind="hwrq", title="lonely",
                            applicability="true"))
    approve(store, "HWRQ-001")
    report = store.derive_subset(parse_config(cfg_text()))
    assert report.waiver_required == (f"{report.config_tag}-HWRQ-001",)


def test_waiver_derives_only_with_its_target():
    store = RmtStore()
    ids = small_superset(store)
    # waiver applies on rram configs; its target h_bus applies everywhere
    rram_cfg = parse_config(
        "ip_name = mem0\ndata_width = 8\naddr_words = 64\n"
        "ecc = none\ntech = rram\n")
    report = store.derive_subset(rram_cfg)
    tag = report.config_tag
    assert report.counts["waiver"] == 1
    derived_waiver = store.get_item(f"{tag}-{ids['waiver']}")
    assert derived_waiver.target == f"{tag}-{ids['h_bus']}"
    assert derived_waiver.state == "approved"
    assert Relationship(derived_waiver.id, derived_waiver.target,
                        "waives") in store.relationships("waives")

    # on sram_hd the waiver predicate is false: skipped
    report2 = store.derive_subset(parse_config(cfg_text()))
    assert ids["waiver"] in report2.skipped


def test_origin_soundness():
    store = RmtStore()
    small_superset(store)
    cfg = parse_config(cfg_text(ecc="dected"))
    report = store.derive_subset(cfg)
    for item in store.list_items(config_tag=report.config_tag):
        if item.origin is None:
            continue
        origin = store.get_item(item.origin)
        assert origin.state == "approved"
        assert eval_predicate(parse_predicate(origin.applicability), cfg)


def test_subset_waiver_after_derivation():
    store = RmtStore()
    store.post_item(RmtItem(id="", kind="hwrq", title="lonely",
                            applicability="true"))
    approve(store, "HWRQ-001")
    report = store.derive_subset(parse_config(cfg_text()))
    tag = report.config_tag
    waiver = store.post_item(RmtItem(
        id="", kind="waiver", title="accepted risk", config_tag=tag,
        target=f"{tag}-HWRQ-001"))
    assert waiver == f"{tag}-WVR-001"
    assert store.get_item(waiver).state == "draft"
    approve(store, waiver)
    assert store.get_item(waiver).state == "approved"
    # scope mismatch: superset waiver cannot target a subset hwrq
    with pytest.raises(ValidationError):
        store.post_item(RmtItem(id="", kind="waiver", title="w",
                                applicability="true",
                                target=f"{tag}-HWRQ-001"))


def test_export_ipvs_structure_and_determinism():
    store = RmtStore()
    ids = small_superset(store)
    report = store.derive_subset(parse_config(cfg_text()))
    tag = report.config_tag
    store.update_test_status(f"{tag}-{ids['t_ecc']}", "pass", 62.5, "x")
    doc = store.export_ipvs(tag)
    assert doc == store.export_ipvs(tag)

    parsed_tag, items, rels = parse_ipvs(doc)
    assert parsed_tag == tag
    assert [i.id for i in items] == sorted(i.id for i in items)
    by_id = {i.id: i for i in items}
    assert by_id[f"{tag}-{ids['t_ecc']}"].coverage_pct == 62.5
    assert by_id[f"{tag}-{ids['t_ecc']}"].status == "pass"
    assert by_id[f"{tag}-{ids['t_bus']}"].status == "not_run"
    assert Relationship(f"{tag}-{ids['t_ecc']}", f"{tag}-{ids['h_ecc']}",
                        "verifies") in rels
    assert "37.5" not in doc  # only the updated value appears
    assert "62.5" in doc


def test_export_unknown_tag():
    store = RmtStore()
    small_superset(store)
    with pytest.raises(UnknownItemError):
        store.export_ipvs("0" * 16)


def test_persistence_roundtrip(tmp_path):
    store = RmtStore()
    ids = small_superset(store)
    report = store.derive_subset(parse_config(cfg_text()))
    tag = report.config_tag
    store.update_test_status(f"{tag}-{ids['t_ecc']}", "fail", 37.5, "file:///r")

    path = tmp_path / "store.xml"
    store.save(str(path))
    assert not (tmp_path / "store.xml.tmp").exists()
    loaded = RmtStore.load(str(path))
    assert loaded.export_ipvs(tag) == store.export_ipvs(tag)
    loaded.save(str(tmp_path / "again.xml"))
    assert (tmp_path / "again.xml").read_bytes() == path.read_bytes()
    item = loaded.get_item(ids["t_ecc"])
    assert item.applicability == "ecc >= secded"
    assert item.history == ("draft", "in_review", "approved")


def test_concurrent_posts_all_land():
    store = RmtStore()

    def post(n):
        for i in range(25):
            store.post_item(RmtItem(id=f"HWRQ-{n}{i:02d}x", kind="hwrq",
                                    title=f"h{n}-{i}", applicability="true"))

    threads = [threading.Thread(target=post, args=(n,)) for n in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store.list_items(kind="hwrq")) == 100
