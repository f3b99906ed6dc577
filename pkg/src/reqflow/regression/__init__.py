"""Test generation and execution: descriptors, session files, scenario
runners, and failure collection."""

from reqflow.regression.descriptors import (
    GenerationError,
    SessionError,
    SessionSpec,
    SessionTest,
    TestDescriptor,
    generate_tests,
    parse_descriptors,
    parse_session,
    render_descriptors,
    render_session,
)
from reqflow.regression.runner import (
    RunResult,
    SessionResult,
    collect_failures,
    parse_session_result,
    render_session_result,
    run_session,
)

__all__ = [
    "GenerationError",
    "RunResult",
    "SessionError",
    "SessionResult",
    "SessionSpec",
    "SessionTest",
    "TestDescriptor",
    "collect_failures",
    "generate_tests",
    "parse_descriptors",
    "parse_session",
    "parse_session_result",
    "render_descriptors",
    "render_session",
    "render_session_result",
    "run_session",
]
