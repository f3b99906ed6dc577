"""Shared test helpers: independent oracles for pattern matching and rollup,
plus randomized plan/session generators."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction


def regex_match(pattern: str, name: str) -> bool:
    """Reference matcher: translate the pattern to a regex. A lone * becomes
    one dot-free segment, ** becomes one or more segments."""
    parts = []
    for seg in pattern.split("."):
        if seg == "*":
            parts.append(r"[^.]+")
        elif seg == "**":
            parts.append(r"[^.]+(?:\.[^.]+)*")
        else:
            parts.append(re.escape(seg))
    return re.fullmatch(r"\.".join(parts), name) is not None


@dataclass
class StubRun:
    test: str
    index: int
    checks: tuple = ()
    bin_hits: tuple = ()


@dataclass
class StubSession:
    runs: list
    declared_bins: tuple
    unmapped_entities: int | None = None


def recount_item(patterns, runs, declared_bins):
    """Brute-force rollup of one plan item: fold every run's entities and
    re-match them with the regex reference matcher."""
    checks = {}
    for run in runs:
        for name, passed in run.checks:
            checks[name] = checks.get(name, True) and passed
    hits = {}
    for run in runs:
        for name in run.bin_hits:
            hits[name] = hits.get(name, 0) + 1

    matched_checks = [n for n in checks
                      if any(regex_match(p, n) for p in patterns)]
    matched_bins = [n for n in set(declared_bins)
                    if any(regex_match(p, n) for p in patterns)]
    if not matched_checks:
        status = "not_run"
    elif all(checks[n] for n in matched_checks):
        status = "pass"
    else:
        status = "fail"
    if matched_bins:
        hit = sum(1 for n in matched_bins if hits.get(n, 0) > 0)
        coverage = Fraction(100 * hit, len(matched_bins))
    else:
        coverage = Fraction(100)
    return status, coverage, len(matched_checks) + len(matched_bins)


def worst_status(statuses):
    rank = {"fail": 0, "not_run": 1, "pass": 2}
    return min(statuses, key=rank.get)


def random_plan_and_session(rng: random.Random):
    """A randomized (ipvs document, runs, declared bins) triple for the
    rollup recount oracle. Entity names overlap the plan's tests only
    partially so unmapped entities occur."""
    from reqflow.rmt.store import Relationship, RmtItem
    from reqflow.rmt.xmlio import render_ipvs

    tag = f"{rng.getrandbits(64):016x}"
    n_hwrq = rng.randint(1, 4)
    n_tc = rng.randint(1, 6)
    items = []
    rels = []
    for i in range(n_hwrq):
        items.append(RmtItem(id=f"{tag}-HWRQ-{i + 1:03d}", kind="hwrq",
                             title=f"req {i}", state="approved",
                             origin=f"HWRQ-{i + 1:03d}", config_tag=tag))
    tests = []
    for i in range(n_tc):
        tc_id = f"{tag}-TC-{i + 1:03d}"
        tests.append(tc_id)
        items.append(RmtItem(id=tc_id, kind="testcase", title=f"test {i}",
                             domain="both", state="approved",
                             origin=f"TC-{i + 1:03d}", config_tag=tag,
                             status="not_run", coverage_pct=0.0))
        hwrq = rng.randrange(n_hwrq)
        rels.append(Relationship(tc_id, f"{tag}-HWRQ-{hwrq + 1:03d}",
                                 "verifies"))

    declared = []
    runs = []
    for tc_id in tests:
        points = rng.randint(1, 3)
        for p in range(points):
            for b in range(rng.randint(1, 4)):
                declared.append(f"cov.{tc_id}.p{p}.b{b}")
    # one orphan entity family that belongs to no test
    declared.append("cov.orphan.p0.b0")

    for run_index, tc_id in enumerate(tests):
        for idx in range(rng.randint(1, 3)):
            checks = tuple(
                (f"chk.{tc_id}.c{c}", rng.random() > 0.15)
                for c in range(rng.randint(0, 3)))
            bins = tuple(b for b in declared
                         if b.startswith(f"cov.{tc_id}.")
                         and rng.random() > 0.5)
            runs.append(StubRun(test=tc_id, index=idx, checks=checks,
                                bin_hits=bins))
        if run_index == 0:
            runs.append(StubRun(test="ghost", index=0,
                                checks=(("chk.ghost.c0", True),),
                                bin_hits=()))

    doc = render_ipvs(tag, items, rels)
    return doc, runs, tuple(declared)
