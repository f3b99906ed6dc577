"""Command line entry points.

``reqflow flow`` runs the whole pipeline for one configuration; the step
commands (derive, plan, generate, run, report) expose the same pipeline one
artifact at a time, each consuming what the previous one wrote. ``sweep``
crosses a configuration matrix, ``serve`` starts the HTTP store, and
``init-superset`` writes the built-in superset to a store file.

REQFLOW_STORE and REQFLOW_ARCHIVE provide defaults for --superset/--store
and --archive; explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime
from pathlib import Path

from reqflow.configspec import parse_config
from reqflow.fixture import build_superset
from reqflow.flow import (
    DEFAULT_MATRIX,
    DEFAULT_SEED,
    FlowOutcome,
    run_flow,
    run_sweep,
)
from reqflow.regression import (
    collect_failures,
    generate_tests,
    parse_descriptors,
    parse_session_result,
    render_descriptors,
    render_session_result,
    run_session,
)
from reqflow.regression.runner import EXIT_INFRA
from reqflow.report import (
    archive_report,
    emit_rmt_xml,
    emit_vplan_html,
    push_results,
)
from reqflow.rmt.store import RmtStore
from reqflow.rmt.xmlio import parse_ipvs
from reqflow.vplan import build_vplan, render_vplan, rollup


def _env(flag: str | None, name: str) -> str | None:
    return flag if flag is not None else os.environ.get(name)


def _stamp(enabled: bool) -> str | None:
    return datetime.now().isoformat(timespec="seconds") if enabled else None


def _print_outcome(outcome: FlowOutcome) -> None:
    for name, status in outcome.steps:
        print(f"{name:<9} {status}")
    for name in sorted(outcome.artifacts):
        print(f"  {name}: {outcome.artifacts[name]}")
    if outcome.total_runs:
        print(f"runs: {outcome.total_runs}  failed: {outcome.failed_runs}  "
              f"coverage: {outcome.coverage_mean:.1f}")


def cmd_flow(args) -> int:
    outcome = run_flow(
        Path(args.config).read_text(encoding="utf-8"),
        args.out,
        seed=args.seed,
        superset_path=_env(args.superset, "REQFLOW_STORE"),
        archive_dir=_env(args.archive, "REQFLOW_ARCHIVE"),
        stamp=_stamp(args.stamp),
        jobs=args.jobs,
    )
    _print_outcome(outcome)
    return outcome.exit_code


def cmd_sweep(args) -> int:
    if args.matrix is None:
        matrix_text = DEFAULT_MATRIX
    else:
        matrix_text = Path(args.matrix).read_text(encoding="utf-8")
    outcome = run_sweep(
        matrix_text,
        args.out,
        seed=args.seed,
        superset_path=_env(args.superset, "REQFLOW_STORE"),
        archive_dir=_env(args.archive, "REQFLOW_ARCHIVE"),
        jobs=args.jobs,
    )
    print(Path(outcome.summary_path).read_text(encoding="utf-8"), end="")
    return outcome.exit_code


def cmd_derive(args) -> int:
    store_path = _env(args.superset, "REQFLOW_STORE")
    store = RmtStore.load(store_path) if store_path else build_superset()
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    report = store.derive_subset(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(store.export_ipvs(report.config_tag), encoding="utf-8")
    if store_path:
        store.save(store_path)
    print(f"config_tag: {report.config_tag}")
    for kind in sorted(report.counts):
        print(f"  {kind}: {report.counts[kind]}")
    if report.waiver_required:
        print("waiver required: " + ", ".join(report.waiver_required))
    print(f"ipvs: {out}")
    return 0


def cmd_plan(args) -> int:
    plan = build_vplan(Path(args.ipvs).read_text(encoding="utf-8"))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_vplan(plan), encoding="utf-8")
    print(f"plan items: {len(plan.items())}  ({out})")
    return 0


def cmd_generate(args) -> int:
    tag, items, _ = parse_ipvs(Path(args.ipvs).read_text(encoding="utf-8"))
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    tcs = [i for i in items if i.kind == "testcase"]
    descriptors, session_text = generate_tests(tcs, cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tests.desc").write_text(
        render_descriptors(tag, descriptors), encoding="utf-8")
    (out / "regr.session").write_text(session_text, encoding="utf-8")
    print(f"descriptors: {len(descriptors)}  ({out / 'tests.desc'})")
    print(f"session: {out / 'regr.session'}")
    return 0


def cmd_run(args) -> int:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    _, descriptors = parse_descriptors(
        Path(args.descriptors).read_text(encoding="utf-8"))
    session_text = Path(args.session).read_text(encoding="utf-8")
    result = run_session(session_text, descriptors, cfg, jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "session-result.xml").write_text(
        render_session_result(result), encoding="utf-8")
    code = collect_failures(result, str(out / "failures"))
    print(f"runs: {result.total_runs}  failed: {result.failed_runs}")
    print(f"result: {out / 'session-result.xml'}")
    return code


def cmd_report(args) -> int:
    plan = build_vplan(Path(args.ipvs).read_text(encoding="utf-8"))
    result = parse_session_result(
        Path(args.result).read_text(encoding="utf-8"))
    plan = rollup(plan, result)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "vplan.xml").write_text(render_vplan(plan), encoding="utf-8")
    html = emit_vplan_html(plan, unmapped_entities=result.unmapped_entities,
                           stamp=_stamp(args.stamp))
    (out / "vplan.html").write_text(html, encoding="utf-8")
    archive = _env(args.archive, "REQFLOW_ARCHIVE") or str(out / "archive")
    link = archive_report(html, archive, plan.config_tag, result.session)
    xml = emit_rmt_xml(plan, result.session, link)
    (out / "rmt-report.xml").write_text(xml, encoding="utf-8")
    print(f"report: {out / 'vplan.html'}")
    print(f"archived: {link}")
    store_path = _env(args.superset, "REQFLOW_STORE")
    if store_path:
        store = RmtStore.load(store_path)
        applied = push_results(xml, store)
        store.save(store_path)
        print(f"pushed: {applied} testcases into {store_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from reqflow.service import create_app

    app = create_app(store_path=_env(args.store, "REQFLOW_STORE"))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_init_superset(args) -> int:
    store = build_superset()
    path = _env(args.out, "REQFLOW_STORE")
    if path is None:
        print("error: give --out or set REQFLOW_STORE", file=sys.stderr)
        return 2
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    store.save(path)
    counts = {k: len(store.list_items(kind=k))
              for k in ("hwrq", "testcase", "waiver")}
    print(f"superset: {path}  ({counts['hwrq']} hwrqs, "
          f"{counts['testcase']} testcases, {counts['waiver']} waivers)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqflow",
        description="requirements-driven verification flow")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("flow", cmd_flow, "derive, generate, run, and report end to end")
    p.add_argument("--config", required=True)
    p.add_argument("--superset", default=None)
    p.add_argument("--out", default="reqflow-out")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--archive", default=None)
    p.add_argument("--stamp", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = add("sweep", cmd_sweep, "run one flow per matrix configuration")
    p.add_argument("--matrix", default=None,
                   help="matrix file (defaults to the built-in full matrix)")
    p.add_argument("--superset", default=None)
    p.add_argument("--out", default="reqflow-sweep")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--archive", default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = add("derive", cmd_derive, "derive a configuration subset")
    p.add_argument("--config", required=True)
    p.add_argument("--superset", default=None)
    p.add_argument("--out", default="ipvs.xml")

    p = add("plan", cmd_plan, "build the verification plan for a subset")
    p.add_argument("--ipvs", required=True)
    p.add_argument("--out", default="vplan.xml")

    p = add("generate", cmd_generate, "generate descriptors and a session")
    p.add_argument("--ipvs", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=".")

    p = add("run", cmd_run, "execute a generated session")
    p.add_argument("--config", required=True)
    p.add_argument("--session", required=True)
    p.add_argument("--descriptors", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--jobs", type=int, default=1)

    p = add("report", cmd_report, "roll up results and emit reports")
    p.add_argument("--ipvs", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--superset", default=None,
                   help="store file to push statuses into")
    p.add_argument("--out", default=".")
    p.add_argument("--archive", default=None)
    p.add_argument("--stamp", action="store_true")

    p = add("serve", cmd_serve, "start the HTTP store service")
    p.add_argument("--store", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = add("init-superset", cmd_init_superset,
            "write the built-in superset to a store file")
    p.add_argument("--out", default=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    # every domain error (config, store, plan, session) derives from ValueError
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
