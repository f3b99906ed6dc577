"""Session execution: seeds, scenario dispatch, results, failure bundles.

Runs are seeded as FNV-1a 64 of ``<session_seed>/<test_name>/<run_index>``
(decimal seed, zero-based index), so a session file alone pins every run.
Results serialize to a deterministic XML document and failing runs can be
collected into one log file each plus a summary.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Sequence

from reqflow.configspec import IpConfiguration, fnv1a64
from reqflow.regression.descriptors import (
    SessionError,
    TestDescriptor,
    parse_session,
)
from reqflow.regression.scenarios import SCENARIO_RUNNERS, Collector
from reqflow.xmlutil import XmlElement, render_document

EXIT_CLEAN = 0
EXIT_FAILURES = 1
EXIT_INFRA = 2


@dataclass(frozen=True)
class RunResult:
    """Outcome of one seeded run of one test."""

    test: str
    index: int
    seed: int
    verdict: str  # pass | fail
    checks: tuple[tuple[str, bool], ...]
    bin_hits: tuple[str, ...]
    log: tuple[str, ...] = ()


@dataclass
class SessionResult:
    """All runs of one session, with the coverage denominator it declared.

    unmapped_entities stays None until a verification-plan rollup counts
    the emitted entities no plan item claimed.
    """

    session: str
    config_tag: str
    seed: int
    runs: tuple[RunResult, ...]
    declared_bins: tuple[str, ...]
    total_runs: int = 0
    failed_runs: int = 0
    unmapped_entities: int | None = None


def run_seed(session_seed: int, test: str, index: int) -> int:
    return fnv1a64(f"{session_seed}/{test}/{index}")


def _execute_run(cfg: IpConfiguration, desc: TestDescriptor,
                 name: str, index: int, seed: int) -> RunResult:
    col = Collector(name)
    SCENARIO_RUNNERS[desc.scenario](cfg, desc, seed, col)
    verdict = "pass" if all(col.checks.values()) else "fail"
    return RunResult(
        test=name,
        index=index,
        seed=seed,
        verdict=verdict,
        checks=tuple(sorted(col.checks.items())),
        bin_hits=tuple(sorted(col.hits)),
        log=tuple(col.log) if verdict == "fail" else (),
    )


def run_session(
    session_text: str,
    descriptors: Sequence[TestDescriptor],
    cfg: IpConfiguration,
    jobs: int = 1,
) -> SessionResult:
    """Execute every run of a session against the configured model.

    Each session test needs a descriptor of the same name agreeing on
    runner and count; the descriptor supplies the scenario. Runs execute
    sequentially, or on a bounded thread pool when jobs exceeds one, and
    results come back sorted by (test, index) either way.
    """
    spec = parse_session(session_text)
    by_name = {d.name: d for d in descriptors}
    work: list[tuple[TestDescriptor, str, int, int]] = []
    for test in spec.tests:
        desc = by_name.get(test.name)
        if desc is None:
            raise SessionError(f"no descriptor for session test {test.name!r}")
        if desc.runner != test.runner or desc.count != test.count:
            raise SessionError(
                f"descriptor for {test.name!r} disagrees with the session "
                f"({desc.runner}/{desc.count} vs {test.runner}/{test.count})"
            )
        for index in range(test.count):
            work.append(
                (desc, test.name, index, run_seed(spec.seed, test.name, index)))
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda w: _execute_run(cfg, *w), work))
    else:
        runs = [_execute_run(cfg, *w) for w in work]
    runs.sort(key=lambda r: (r.test, r.index))
    declared = sorted(
        f"cov.{d.name}.{point}.{b}"
        for d in descriptors
        for point, bins in d.coverpoints
        for b in bins
    )
    return SessionResult(
        session=spec.name,
        config_tag=cfg.config_tag(),
        seed=spec.seed,
        runs=tuple(runs),
        declared_bins=tuple(declared),
        total_runs=len(runs),
        failed_runs=sum(1 for r in runs if r.verdict == "fail"),
    )


def render_session_result(result: SessionResult) -> str:
    """Deterministic XML serialization of a SessionResult."""
    attrs = {
        "session": result.session,
        "config_tag": result.config_tag,
        "seed": str(result.seed),
    }
    if result.unmapped_entities is not None:
        attrs["unmapped_entities"] = str(result.unmapped_entities)
    root = XmlElement("session-result", attrs)
    root.child(
        "aggregate",
        {"runs": str(result.total_runs), "fails": str(result.failed_runs)},
    )
    declared = root.child("declared-bins")
    for name in result.declared_bins:
        declared.child("bin", {"name": name})
    for run in result.runs:
        el = root.child(
            "run",
            {
                "test": run.test,
                "index": str(run.index),
                "seed": str(run.seed),
                "verdict": run.verdict,
            },
        )
        for name, ok in run.checks:
            el.child("check", {"name": name, "ok": "true" if ok else "false"})
        for name in run.bin_hits:
            el.child("hit", {"bin": name})
        for line in run.log:
            el.child("log-line", text=line)
    return render_document(root)


def parse_session_result(text: str) -> SessionResult:
    """Parse render_session_result output back into a SessionResult."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise SessionError(f"bad session result document: {exc}") from exc
    if root.tag != "session-result":
        raise SessionError(f"unexpected root element {root.tag!r}")
    runs = []
    declared: tuple[str, ...] = ()
    for el in root:
        if el.tag == "declared-bins":
            declared = tuple(b.get("name", "") for b in el)
        elif el.tag == "run":
            runs.append(
                RunResult(
                    test=el.get("test", ""),
                    index=int(el.get("index", "0")),
                    seed=int(el.get("seed", "0")),
                    verdict=el.get("verdict", ""),
                    checks=tuple(
                        (c.get("name", ""), c.get("ok") == "true")
                        for c in el
                        if c.tag == "check"
                    ),
                    bin_hits=tuple(
                        h.get("bin", "") for h in el if h.tag == "hit"
                    ),
                    log=tuple(
                        line.text or "" for line in el if line.tag == "log-line"
                    ),
                )
            )
    unmapped = root.get("unmapped_entities")
    result = SessionResult(
        session=root.get("session", ""),
        config_tag=root.get("config_tag", ""),
        seed=int(root.get("seed", "0")),
        runs=tuple(runs),
        declared_bins=declared,
        total_runs=len(runs),
        failed_runs=sum(1 for r in runs if r.verdict == "fail"),
        unmapped_entities=int(unmapped) if unmapped is not None else None,
    )
    return result


def collect_failures(result: SessionResult, out_dir: str) -> int:
    """Write one log file per failing run plus a summary.

    Returns the session exit code: 0 with no failures, 1 when any run
    failed, 2 when the bundle itself could not be written.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
        lines = [
            f"session: {result.session}",
            f"config_tag: {result.config_tag}",
            f"runs: {result.total_runs}",
            f"fails: {result.failed_runs}",
        ]
        for run in result.runs:
            if run.verdict != "fail":
                continue
            name = f"{run.test}-{run.index}.log"
            lines.append(f"fail: {run.test} run {run.index} ({name})")
            failed = [entity for entity, ok in run.checks if not ok]
            body = [
                f"test: {run.test}",
                f"run: {run.index}",
                f"seed: {run.seed}",
                "failed checks: " + ", ".join(failed),
            ]
            body.extend(run.log)
            _write_text(os.path.join(out_dir, name), "\n".join(body) + "\n")
        _write_text(os.path.join(out_dir, "summary.txt"), "\n".join(lines) + "\n")
    except OSError:
        return EXIT_INFRA
    return EXIT_FAILURES if result.failed_runs else EXIT_CLEAN


def _write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
