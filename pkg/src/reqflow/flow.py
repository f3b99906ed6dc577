"""End-to-end flow: derive a subset, plan, generate, run, and report.

One flow invocation loads (or builds) a superset store, derives the subset
for a configuration, generates and executes its regression session, rolls
the results into the verification plan, and pushes statuses back into the
store. Every artifact lands under one output directory so a re-run with
identical inputs reproduces it byte for byte.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from reqflow.configspec import ConfigError, IpConfiguration, parse_config
from reqflow.dut.ecc import UnsupportedEccError, build_ecc
from reqflow.fixture import build_superset
from reqflow.regression import (
    collect_failures,
    generate_tests,
    render_descriptors,
    render_session_result,
    run_session,
)
from reqflow.regression.runner import EXIT_CLEAN, EXIT_FAILURES, EXIT_INFRA
from reqflow.report import (
    archive_report,
    emit_rmt_xml,
    emit_vplan_html,
    push_results,
)
from reqflow.rmt.store import RmtStore
from reqflow.vplan import build_vplan, render_vplan, rollup

DEFAULT_SEED = 1

STEP_NAMES = ("derive", "plan", "generate", "run", "report")

# every alternative of every key, crossed, minus unsupported ECC widths
DEFAULT_MATRIX = """\
ip_name = mem0
data_width = 8, 16, 32
addr_words = 64
ecc = none, sed, secded, dected
tech = sram_hd, sram_hs, rram
lp_modes = none, retention, shutdown, retention+shutdown
ahb_bursts = single+incr4+incr8
"""

_SET_KEYS = ("lp_modes", "ahb_bursts", "bug_mutations")
_INT_KEYS = ("data_width", "addr_words")
_MATRIX_KEYS = ("ip_name", "data_width", "addr_words", "ecc", "tech",
                "lp_modes", "ahb_bursts", "bug_mutations")


@dataclass
class FlowOutcome:
    """What one flow invocation did: step statuses, exit code, artifacts."""

    config_tag: str
    exit_code: int
    steps: tuple[tuple[str, str], ...]
    artifacts: dict[str, str] = field(default_factory=dict)
    total_runs: int = 0
    failed_runs: int = 0
    coverage_mean: float = 0.0

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_CLEAN


@dataclass
class SweepRow:
    config_tag: str
    exit_code: int
    failed_runs: int
    coverage_mean: float
    seconds: float
    note: str = ""


@dataclass
class SweepOutcome:
    rows: tuple[SweepRow, ...]
    exit_code: int
    summary_path: str


def _write(path: Path, text: str) -> str:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return str(path)


def _load_store(superset_path: str | None) -> RmtStore:
    if superset_path is None:
        return build_superset()
    return RmtStore.load(superset_path)


def run_flow(
    config_text: str,
    out_dir: str,
    seed: int = DEFAULT_SEED,
    superset_path: str | None = None,
    archive_dir: str | None = None,
    stamp: str | None = None,
    jobs: int = 1,
) -> FlowOutcome:
    """Run derive, plan, generate, run, and report for one configuration.

    Exit code 0 means every step completed and no run failed; 1 means the
    pipeline completed but runs failed; 2 means a step itself broke, in
    which case the remaining steps are skipped. The store is loaded fresh
    per invocation and never written back, so repeating a flow with the
    same inputs yields byte-identical artifacts.
    """
    steps: list[tuple[str, str]] = []
    artifacts: dict[str, str] = {}
    tag = ""
    try:
        cfg = parse_config(config_text)
        tag = cfg.config_tag()
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        archive = archive_dir if archive_dir is not None else str(out / "archive")
        store = _load_store(superset_path)

        store.derive_subset(cfg)
        ipvs = store.export_ipvs(tag)
        artifacts["ipvs"] = _write(out / "ipvs.xml", ipvs)
        steps.append(("derive", "ok"))

        plan = build_vplan(ipvs)
        steps.append(("plan", "ok"))

        tcs = store.list_items(kind="testcase", config_tag=tag)
        descriptors, session_text = generate_tests(tcs, cfg, seed)
        artifacts["descriptors"] = _write(
            out / "tests.desc", render_descriptors(tag, descriptors))
        artifacts["session"] = _write(out / "regr.session", session_text)
        steps.append(("generate", "ok"))

        result = run_session(session_text, descriptors, cfg, jobs=jobs)
        artifacts["session_result"] = _write(
            out / "session-result.xml", render_session_result(result))
        run_exit = collect_failures(result, str(out / "failures"))
        artifacts["failures"] = str(out / "failures")
        if run_exit == EXIT_INFRA:
            raise OSError(f"could not write the failure bundle under {out}")
        steps.append(("run", "ok"))

        plan = rollup(plan, result)
        artifacts["vplan"] = _write(out / "vplan.xml", render_vplan(plan))
        html = emit_vplan_html(
            plan, unmapped_entities=result.unmapped_entities, stamp=stamp)
        artifacts["vplan_html"] = _write(out / "vplan.html", html)
        link = archive_report(html, archive, tag, result.session)
        artifacts["archived_report"] = link
        xml = emit_rmt_xml(plan, result.session, link)
        artifacts["rmt_report"] = _write(out / "rmt-report.xml", xml)
        push_results(xml, store)
        artifacts["ipvs_final"] = _write(
            out / "ipvs-final.xml", store.export_ipvs(tag))
        steps.append(("report", "ok"))
    except Exception as exc:
        broke = STEP_NAMES[len(steps)]
        steps.append((broke, f"error: {exc}"))
        steps.extend((name, "skipped")
                     for name in STEP_NAMES[len(steps):])
        return FlowOutcome(config_tag=tag, exit_code=EXIT_INFRA,
                           steps=tuple(steps), artifacts=artifacts)

    coverages = [float(item.rollup.coverage) for item in plan.testcases]
    mean = sum(coverages) / len(coverages) if coverages else 0.0
    return FlowOutcome(
        config_tag=tag,
        exit_code=run_exit,
        steps=tuple(steps),
        artifacts=artifacts,
        total_runs=result.total_runs,
        failed_runs=result.failed_runs,
        coverage_mean=mean,
    )


# ---------------------------------------------------------------------------
# configuration matrices


def _parse_alternative(key: str, raw: str):
    value = raw.strip()
    if key in _SET_KEYS:
        if value == "none":
            return ()
        return tuple(part.strip() for part in value.split("+"))
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"matrix key {key!r}: {value!r} is not a number")
    return value


def parse_matrix(text: str) -> list[IpConfiguration]:
    """Expand a matrix file into the configurations it spans.

    Each line reads ``key = alt1, alt2, ...``; alternatives for set-valued
    keys join members with ``+`` and spell the empty set ``none``. The
    cross product of all alternatives is enumerated in key order, dropping
    combinations whose ECC level does not support the data width.
    """
    alternatives: dict[str, list] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"matrix line {lineno}: expected 'key = values'")
        key, _, rest = line.partition("=")
        key = key.strip()
        if key not in _MATRIX_KEYS:
            raise ConfigError(f"matrix line {lineno}: unknown key {key!r}")
        if key in alternatives:
            raise ConfigError(f"matrix line {lineno}: duplicate key {key!r}")
        values = [_parse_alternative(key, part) for part in rest.split(",")]
        if not values or not rest.strip():
            raise ConfigError(f"matrix line {lineno}: no values for {key!r}")
        alternatives[key] = values

    missing = [k for k in _MATRIX_KEYS if k not in alternatives
               and k != "bug_mutations"]
    if missing:
        raise ConfigError(f"matrix is missing keys: {', '.join(missing)}")
    alternatives.setdefault("bug_mutations", [()])

    configs = []
    keys = list(_MATRIX_KEYS)
    for combo in itertools.product(*(alternatives[k] for k in keys)):
        fields = dict(zip(keys, combo))
        try:
            build_ecc(fields["ecc"], fields["data_width"])
        except UnsupportedEccError:
            continue
        configs.append(IpConfiguration(**fields))
    if not configs:
        raise ConfigError("matrix spans no supported configuration")
    return configs


def run_sweep(
    matrix_text: str,
    out_dir: str,
    seed: int = DEFAULT_SEED,
    superset_path: str | None = None,
    archive_dir: str | None = None,
    jobs: int = 1,
) -> SweepOutcome:
    """Run one flow per matrix configuration and write a summary table.

    Artifacts for each configuration land under ``<out_dir>/<config_tag>``.
    A configuration whose flow breaks is recorded in its row and the sweep
    moves on. The sweep exit code is 2 if any flow broke, 1 if any run
    failed, else 0.
    """
    configs = parse_matrix(matrix_text)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    for cfg in configs:
        tag = cfg.config_tag()
        started = time.perf_counter()
        outcome = run_flow(
            cfg.canonical_text(),
            str(out / tag),
            seed=seed,
            superset_path=superset_path,
            archive_dir=archive_dir,
            jobs=jobs,
        )
        elapsed = time.perf_counter() - started
        note = ""
        if outcome.exit_code == EXIT_INFRA:
            note = next((status for _, status in outcome.steps
                         if status.startswith("error")), "error")
        rows.append(SweepRow(
            config_tag=tag,
            exit_code=outcome.exit_code,
            failed_runs=outcome.failed_runs,
            coverage_mean=outcome.coverage_mean,
            seconds=elapsed,
            note=note,
        ))

    lines = [f"{'config_tag':<16}  {'exit':>4}  {'fails':>5}  "
             f"{'coverage':>8}  {'seconds':>8}"]
    for row in rows:
        lines.append(
            f"{row.config_tag:<16}  {row.exit_code:>4}  "
            f"{row.failed_runs:>5}  {row.coverage_mean:>8.1f}  "
            f"{row.seconds:>8.2f}"
            + (f"  {row.note}" if row.note else ""))
    lines.append(f"configs: {len(rows)}  "
                 f"failing: {sum(1 for r in rows if r.exit_code == EXIT_FAILURES)}  "
                 f"broken: {sum(1 for r in rows if r.exit_code == EXIT_INFRA)}")
    summary_path = _write(out / "sweep-summary.txt", "\n".join(lines) + "\n")

    if any(r.exit_code == EXIT_INFRA for r in rows):
        code = EXIT_INFRA
    elif any(r.exit_code == EXIT_FAILURES for r in rows):
        code = EXIT_FAILURES
    else:
        code = EXIT_CLEAN
    return SweepOutcome(rows=tuple(rows), exit_code=code,
                        summary_path=summary_path)
