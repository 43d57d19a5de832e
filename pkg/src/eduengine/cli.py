"""Command-line interface.

Subcommands for authors (new, validate, pack, unpack, check) and learners
(serve, progress). ``edu check`` exits 0 when solved, 1 when failed, 2 for
an unknown task, and 3 when the checker itself errored.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import courseformat
from .checkers import CheckContext, check, load_profiles, reference_workspace
from .model import CheckResult, CheckStatus, find_task, normalize_text
from .progress import load_store, usage_stats
from .session import Session, SessionLockHeld
from .templates import TEMPLATE_NAMES, scaffold

DEFAULT_PORT = 7350


def _load_course_or_fail(root: Path) -> "courseformat.Course":
    try:
        return courseformat.load_course(root)
    except courseformat.CourseValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v.code} at {v.path or '<course>'}: {v.message}", file=sys.stderr)
        raise SystemExit(2)
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_new(args: argparse.Namespace) -> int:
    try:
        dest = scaffold(args.template, Path(args.dest))
    except courseformat.DestNotEmpty as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"created course from template '{args.template}' at {dest}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    root = Path(args.root)
    try:
        course = courseformat.load_course(root)
    except courseformat.CourseValidationError as exc:
        print(f"{len(exc.violations)} violation(s):")
        for v in exc.violations:
            print(f"  {v.code} at {v.path or '<course>'}: {v.message}")
        return 1
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_tasks = sum(len(lesson.tasks) for section in course.sections for lesson in section.lessons)
    print(f"OK: course '{course.id}' is valid ({len(course.sections)} section(s), {n_tasks} task(s))")
    return 0


def cmd_pack(args: argparse.Namespace) -> int:
    root = Path(args.root)
    try:
        out = courseformat.pack_to_file(root, Path(args.output))
    except courseformat.CourseValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"packed {root} -> {out}")
    return 0


def cmd_unpack(args: argparse.Namespace) -> int:
    try:
        dest = courseformat.unpack(Path(args.archive).read_bytes(), Path(args.dest))
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"unpacked into {dest}")
    return 0


def headless_check(
    course_root: Path, task_path: str, workspace_dir: Path | None = None
) -> CheckResult:
    """Run one task's checker without a session.

    Without a workspace override the author's reference solution is checked
    (quizzes grade their correct selection), which is how authors verify
    checker configurations.
    """
    course = courseformat.load_course(course_root)
    found = find_task(course, task_path)
    if found is None:
        raise KeyError(task_path)
    _, _, task = found

    selection = None
    if task.quiz is not None:
        selection = sorted(task.quiz.correct_indices())

    if workspace_dir is not None and task.code is not None:
        tree = {}
        for tf in task.code.visible_files():
            candidate = workspace_dir / Path(tf.path)
            tree[tf.path] = normalize_text(candidate.read_text(encoding="utf-8")) if candidate.is_file() else ""
    else:
        tree = reference_workspace(task)

    context = CheckContext(
        run_configs=course.run_configs,
        style_rules=course.style_rules,
        profiles=load_profiles(course_root),
    )
    return check(task, tree, selection, context)


def cmd_check(args: argparse.Namespace) -> int:
    root = Path(args.root)
    try:
        result = headless_check(root, args.task, Path(args.workspace) if args.workspace else None)
    except KeyError:
        print(f"error: unknown task '{args.task}' (expected section/lesson/task)", file=sys.stderr)
        return 2
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"[{result.status.value}] {result.message}")
    if result.details is not None:
        for violation in result.details.violations:
            print(f"  - {violation}")
        if result.details.first_diff_line is not None:
            print(f"  first difference at line {result.details.first_diff_line}")
        if result.details.expected_excerpt:
            print(f"  expected:\n{_indent(result.details.expected_excerpt)}")
        if result.details.actual_excerpt:
            print(f"  actual:\n{_indent(result.details.actual_excerpt)}")
    if result.status is CheckStatus.SOLVED:
        return 0
    if result.status is CheckStatus.FAILED:
        return 1
    return 3


def _indent(text: str) -> str:
    return "\n".join(f"    {line}" for line in text.splitlines())


def _find_ui_dir(explicit: str | None) -> str | None:
    if explicit:
        return explicit
    env = os.environ.get("EDU_UI_DIR")
    if env:
        return env
    packaged = Path(__file__).parent / "static"
    if packaged.is_dir() and any(packaged.iterdir()):
        return str(packaged)
    local = Path.cwd() / "frontend"
    if (local / "index.html").is_file():
        return str(local)
    return None


def _port_available(host: str, port: int) -> bool:
    import socket

    with socket.socket() as sock:
        try:
            sock.bind((host, port))
        except OSError:
            return False
    return True


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    root = Path(args.root)
    if not _port_available(args.host, args.port):
        print(f"error: port_in_use: {args.host}:{args.port}", file=sys.stderr)
        return 2
    try:
        session = Session.open(root, Path(args.session) if args.session else None)
    except SessionLockHeld as exc:
        print(f"error: lock_held: {exc}", file=sys.stderr)
        return 2
    except courseformat.CourseFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    ui_dir = _find_ui_dir(args.ui)
    app = create_app(session, ui_dir)
    print(f"serving course '{session.course.id}' on http://{args.host}:{args.port}/")
    if ui_dir:
        print(f"web UI from {ui_dir}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        print(f"error: port_in_use: {exc}", file=sys.stderr)
        return 2
    finally:
        session.close()
    return 0


def cmd_progress(args: argparse.Namespace) -> int:
    session_dir = Path(args.session)
    store = load_store(session_dir)
    stats = usage_stats(store)
    print(f"course: {store.course_id or '<unknown>'}")
    print(f"checks run: {stats.checks}")
    print(f"tasks solved: {stats.solved_tasks}")
    by_status: dict[str, int] = {}
    for status in store.statuses.values():
        by_status[status.value] = by_status.get(status.value, 0) + 1
    for status, count in sorted(by_status.items()):
        print(f"  {status}: {count}")
    if stats.events_by_kind:
        print("events:")
        for kind, count in sorted(stats.events_by_kind.items()):
            print(f"  {kind}: {count}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edu", description="Interactive course engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("new", help="scaffold a course from a template")
    p.add_argument("template", choices=TEMPLATE_NAMES)
    p.add_argument("dest")
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("validate", help="load a course directory and report violations")
    p.add_argument("root")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pack", help="build the deterministic distribution archive")
    p.add_argument("root")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("unpack", help="extract a course archive")
    p.add_argument("archive")
    p.add_argument("dest")
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("check", help="run one task's checker headlessly")
    p.add_argument("root")
    p.add_argument("task", help="task path of the form section/lesson/task")
    p.add_argument("--workspace", help="check these files instead of the reference solution")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("serve", help="serve the local learning API and web UI")
    p.add_argument("root")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--session", help="session directory (default: EDU_SESSION_DIR or <root>/.edu-session)")
    p.add_argument("--ui", help="directory of built web UI assets")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("progress", help="summarize a session's progress and usage")
    p.add_argument("session")
    p.set_defaults(func=cmd_progress)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
