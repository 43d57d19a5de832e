"""A learner session: one course, one session directory, one writer.

The session owns the progress store, the on-disk workspace trees, and the
event stream. Every mutation is serialized through one lock, so interleaved
requests always observe some sequential order. Learners edit workspace
files with any editor; the engine reads them back at check and navigation
time.

Session directory layout::

    lock                    held while a session is open
    settings.yaml           course style rules + run configs
    progress.json           status snapshot (module progress)
    events.jsonl            append-only usage log
    workspace-state.json    framework lesson -> current task index
    workspace/<section>/<lesson>[/<task>]/...   learner files
"""

from __future__ import annotations

import json
import os
import queue
import shutil
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from . import progress as prog
from .checkers import CheckContext, SymbolProfile, check, load_profiles
from .courseformat import apply_course_settings, load_course, split_hints
from .model import (
    CheckResult,
    CheckStatus,
    Course,
    Lesson,
    LessonKind,
    Section,
    Task,
    normalize_text,
    progress_summary,
    status_color,
)
from .workspace import (
    FileTree,
    Mode,
    PropagationConflict,
    UnresolvablePlaceholder,
    locate_placeholders,
    materialize,
    propagate,
    reset_task,
)

LOCK_FILE = "lock"
WORKSPACE_DIR = "workspace"
WORKSPACE_STATE_FILE = "workspace-state.json"


class SessionError(Exception):
    pass


class SessionLockHeld(SessionError):
    pass


class UnknownTask(SessionError):
    def __init__(self, task_id: str) -> None:
        self.task_id = task_id
        super().__init__(f"unknown task: {task_id}")


class AtCourseBoundary(SessionError):
    pass


@dataclass(frozen=True)
class TaskRef:
    task_id: str
    section: Section
    lesson: Lesson
    task: Task
    flat_index: int
    task_index: int  # position within the lesson

    @property
    def lesson_key(self) -> str:
        return f"{self.section.id}/{self.lesson.id}"


@dataclass(frozen=True)
class ApiEvent:
    kind: str  # check_started | check_finished | status_changed | navigated
    task_id: str | None = None
    payload: Any = None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "task_id": self.task_id, "payload": self.payload}


class _Broadcaster:
    """Fan-out of ApiEvents to any number of subscriber queues."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def subscribe(self) -> tuple[queue.Queue, Any]:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)

        def unsubscribe() -> None:
            with self._lock:
                if q in self._subscribers:
                    self._subscribers.remove(q)

        return q, unsubscribe

    def emit(self, event: ApiEvent) -> None:
        with self._lock:
            for q in self._subscribers:
                q.put(event)


def _acquire_lock(session_dir: Path) -> Path:
    lock_path = session_dir / LOCK_FILE
    session_dir.mkdir(parents=True, exist_ok=True)
    while True:
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            try:
                holder = int(lock_path.read_text(encoding="utf-8").strip() or "0")
            except (OSError, ValueError):
                holder = 0
            if holder and _pid_alive(holder):
                raise SessionLockHeld(f"session {session_dir} is locked by pid {holder}")
            lock_path.unlink(missing_ok=True)  # stale lock from a dead process
            continue
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return lock_path


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class Session:
    """Stateful engagement of one learner with one course."""

    def __init__(
        self,
        course: Course,
        session_dir: Path,
        profiles: dict[str, SymbolProfile],
        *,
        case_timeout: float = 30.0,
        command_timeout: float | None = None,
    ) -> None:
        self.course = course
        self.session_dir = Path(session_dir)
        self.profiles = profiles
        self._mutex = threading.RLock()
        self._broadcaster = _Broadcaster()
        self._lock_path: Path | None = None
        self._case_timeout = case_timeout
        self._command_timeout = command_timeout

        self.refs: list[TaskRef] = []
        self._by_id: dict[str, TaskRef] = {}
        for section in course.sections:
            for lesson in section.lessons:
                for task_index, task in enumerate(lesson.tasks):
                    ref = TaskRef(
                        task_id=f"{section.id}/{lesson.id}/{task.id}",
                        section=section,
                        lesson=lesson,
                        task=task,
                        flat_index=len(self.refs),
                        task_index=task_index,
                    )
                    self.refs.append(ref)
                    self._by_id[ref.task_id] = ref

        self.store = prog.load_store(self.session_dir, course_id=course.id)
        self._framework_state = self._load_framework_state()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def open(
        cls,
        course_root: Path | str,
        session_dir: Path | str | None = None,
        **kwargs: Any,
    ) -> "Session":
        course_root = Path(course_root)
        course = load_course(course_root)
        profiles = load_profiles(course_root)
        if session_dir is None:
            session_dir = os.environ.get("EDU_SESSION_DIR") or course_root / ".edu-session"
        session = cls(course, Path(session_dir), profiles, **kwargs)
        session._lock_path = _acquire_lock(session.session_dir)
        apply_course_settings(course, session.session_dir)
        if session.store.current_task is None and session.refs:
            session.store = prog.set_current_task(session.store, session.refs[0].task_id)
        session.store = prog.record_course_opened(session.store)
        session._ensure_workspace(session.current_ref())
        session._save()
        return session

    def close(self) -> None:
        if self._lock_path is not None:
            self._lock_path.unlink(missing_ok=True)
            self._lock_path = None

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    # -- lookup ---------------------------------------------------------------

    def resolve(self, task_id: str) -> TaskRef:
        ref = self._by_id.get(task_id)
        if ref is None:
            raise UnknownTask(task_id)
        return ref

    def current_ref(self) -> TaskRef:
        if self.store.current_task and self.store.current_task in self._by_id:
            return self._by_id[self.store.current_task]
        return self.refs[0]

    def subscribe_events(self) -> tuple[queue.Queue, Any]:
        return self._broadcaster.subscribe()

    def _emit(self, kind: str, task_id: str | None = None, payload: Any = None) -> None:
        self._broadcaster.emit(ApiEvent(kind, task_id, payload))

    def _save(self) -> None:
        prog.save_store(self.store, self.session_dir)

    # -- workspace ------------------------------------------------------------

    def workspace_dir(self, ref: TaskRef) -> Path:
        base = self.session_dir / WORKSPACE_DIR / ref.section.id / ref.lesson.id
        if ref.lesson.kind is LessonKind.FRAMEWORK:
            return base
        return base / ref.task.id

    def _load_framework_state(self) -> dict[str, int]:
        path = self.session_dir / WORKSPACE_STATE_FILE
        if not path.is_file():
            return {}
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            return {str(k): int(v) for k, v in dict(data).items()}
        except (ValueError, TypeError):
            return {}

    def _save_framework_state(self) -> None:
        path = self.session_dir / WORKSPACE_STATE_FILE
        path.write_text(json.dumps(self._framework_state, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def _write_tree(self, target: Path, tree: FileTree) -> None:
        for rel, content in tree.items():
            file_path = target / Path(rel)
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(content, encoding="utf-8", newline="\n")

    def _ensure_workspace(self, ref: TaskRef) -> None:
        if ref.task.code is None:
            return
        target = self.workspace_dir(ref)
        if target.is_dir() and any(target.iterdir()):
            return
        self._write_tree(target, materialize(ref.task, Mode.LEARNER))
        if ref.lesson.kind is LessonKind.FRAMEWORK:
            self._framework_state[ref.lesson_key] = ref.task_index
            self._save_framework_state()

    def read_workspace(self, ref: TaskRef) -> FileTree:
        """Read the learner's visible files from disk, LF-normalized."""
        if ref.task.code is None:
            return {}
        base = self.workspace_dir(ref)
        tree: FileTree = {}
        for tf in ref.task.code.visible_files():
            file_path = base / Path(tf.path)
            if file_path.is_file():
                tree[tf.path] = normalize_text(file_path.read_text(encoding="utf-8"))
            else:
                tree[tf.path] = ""
        return tree

    # -- operations -----------------------------------------------------------

    def _check_context(self) -> CheckContext:
        return CheckContext(
            run_configs=self.course.run_configs,
            style_rules=self.course.style_rules,
            profiles=self.profiles,
            case_timeout=self._case_timeout,
            command_timeout=self._command_timeout,
        )

    def check_task(self, task_id: str, selection: Iterable[int] | None = None) -> CheckResult:
        with self._mutex:
            ref = self.resolve(task_id)
            self._ensure_workspace(ref)
            if (
                ref.lesson.kind is LessonKind.FRAMEWORK
                and self._framework_state.get(ref.lesson_key) != ref.task_index
            ):
                # the shared tree belongs to another task of this lesson;
                # grading it here would judge the wrong state
                result = CheckResult(
                    CheckStatus.ERROR,
                    "workspace_not_current: navigate to this task before checking it",
                )
                self._emit("check_started", task_id)
                self._emit("check_finished", task_id, result.to_dict())
                self.store = prog.record_check(
                    self.store, task_id, result, selection, valid_task_ids=self._by_id.keys()
                )
                self._save()
                return result
            workspace = self.read_workspace(ref)
            before = self.store.status_of(task_id)
            self._emit("check_started", task_id)
            result = check(ref.task, workspace, selection, self._check_context())
            self._emit("check_finished", task_id, result.to_dict())
            self.store = prog.record_check(
                self.store, task_id, result, selection, valid_task_ids=self._by_id.keys()
            )
            after = self.store.status_of(task_id)
            if after is not before:
                self._emit("status_changed", task_id, {"status": after.value, "status_color": status_color(after)})
            self._save()
            return result

    def view_task(self, task_id: str) -> dict[str, Any]:
        with self._mutex:
            ref = self.resolve(task_id)
            before = self.store.status_of(task_id)
            self.store = prog.mark_viewed(self.store, task_id, valid_task_ids=self._by_id.keys())
            after = self.store.status_of(task_id)
            if after is not before:
                self._emit("status_changed", task_id, {"status": after.value, "status_color": status_color(after)})
            # Plain-lesson tasks get their own tree on first view; a framework
            # lesson has one shared tree that only follows the current task.
            if ref.lesson.kind is LessonKind.PLAIN or ref.task_id == self.current_ref().task_id:
                self._ensure_workspace(ref)
            self._save()
            return self.task_view(ref)

    def navigate(self, direction: str) -> tuple[str, tuple[PropagationConflict, ...]]:
        """Move to the adjacent task in depth-first course order; within a
        framework lesson this carries the learner's tree forward."""
        if direction not in ("next", "prev"):
            raise ValueError(f"direction must be next|prev, got {direction!r}")
        forward = direction == "next"
        with self._mutex:
            cur = self.current_ref()
            target_index = cur.flat_index + (1 if forward else -1)
            if not (0 <= target_index < len(self.refs)):
                raise AtCourseBoundary(f"no {direction} task from {cur.task_id}")
            tgt = self.refs[target_index]

            conflicts: tuple[PropagationConflict, ...] = ()
            same_framework = (
                cur.lesson is tgt.lesson
                and cur.lesson.kind is LessonKind.FRAMEWORK
                and cur.task_index != tgt.task_index
            )
            if same_framework:
                self._ensure_workspace(cur)
                learner_tree = self.read_workspace(cur)
                report = propagate(cur.lesson, cur.task_index, tgt.task_index, learner_tree)
                self._write_tree(self.workspace_dir(tgt), report.merged)
                self._framework_state[tgt.lesson_key] = tgt.task_index
                self._save_framework_state()
                conflicts = report.conflicts
            else:
                self._ensure_workspace(tgt)

            self.store = prog.record_navigation(self.store, tgt.task_id, forward)
            self._emit(
                "navigated",
                tgt.task_id,
                {"direction": direction, "conflicts": [self._conflict_dict(c) for c in conflicts]},
            )
            self._save()
            return tgt.task_id, conflicts

    def reset(self, task_id: str) -> None:
        """Discard learner content for a task and mark it not started.

        For framework tasks this re-anchors the shared lesson tree at the
        reset task; the submission history keeps whatever was checked before.
        """
        with self._mutex:
            ref = self.resolve(task_id)
            if ref.task.code is not None:
                target = self.workspace_dir(ref)
                if target.is_dir():
                    shutil.rmtree(target)
                self._write_tree(target, reset_task(ref.task))
                if ref.lesson.kind is LessonKind.FRAMEWORK:
                    self._framework_state[ref.lesson_key] = ref.task_index
                    self._save_framework_state()
                    if self.current_ref().lesson is ref.lesson:
                        self.store = prog.set_current_task(self.store, ref.task_id)
            before = self.store.status_of(task_id)
            self.store = prog.record_reset(self.store, task_id, valid_task_ids=self._by_id.keys())
            after = self.store.status_of(task_id)
            if after is not before:
                self._emit("status_changed", task_id, {"status": after.value, "status_color": status_color(after)})
            self._save()

    # -- view construction ------------------------------------------------------

    @staticmethod
    def _conflict_dict(c: PropagationConflict) -> dict[str, Any]:
        return {"path": c.path, "hunk_range": list(c.hunk_range), "resolution": c.resolution}

    def _file_views(self, ref: TaskRef) -> list[dict[str, Any]]:
        if ref.task.code is None:
            return []
        base = self.workspace_dir(ref)
        # A framework lesson's shared tree only reflects the current task;
        # spans for its other tasks are not meaningful.
        tree_usable = (
            ref.lesson.kind is LessonKind.PLAIN
            or self._framework_state.get(ref.lesson_key) == ref.task_index
        )
        tree = self.read_workspace(ref) if tree_usable else {}
        views = []
        for tf in ref.task.code.visible_files():
            spans_by_index: dict[int, tuple[int, int]] = {}
            # resolved=False means locating actually failed on this task's
            # tree; a framework tree anchored elsewhere just has no spans
            resolved = True
            if tf.placeholders and tree_usable:
                try:
                    for span in locate_placeholders(tree.get(tf.path, ""), tf):
                        spans_by_index[span.placeholder_index] = (span.start, span.end)
                except UnresolvablePlaceholder:
                    resolved = False
            views.append(
                {
                    "path": tf.path,
                    "workspace_path": str(base / Path(tf.path)),
                    "placeholders": [
                        {
                            "index": i,
                            "stub_text": p.stub_text,
                            "hints": list(p.hints),
                            "span": list(spans_by_index[i]) if i in spans_by_index else None,
                        }
                        for i, p in enumerate(tf.placeholders)
                    ],
                    "placeholders_resolved": resolved,
                }
            )
        return views

    def task_view(self, ref: TaskRef) -> dict[str, Any]:
        description, hints = split_hints(ref.task.description)
        status = self.store.status_of(ref.task_id)
        view: dict[str, Any] = {
            "id": ref.task_id,
            "title": ref.task.title,
            "kind": ref.task.kind,
            "status": status.value,
            "status_color": status_color(status),
            "description": description,
            "hints": hints,
            "current": ref.task_id == self.current_ref().task_id,
            "has_next": ref.flat_index + 1 < len(self.refs),
            "has_prev": ref.flat_index > 0,
            "files": self._file_views(ref),
        }
        if ref.task.quiz is not None:
            view["quiz"] = {
                "mode": ref.task.quiz.mode.value,
                "options": [{"text": opt.text} for opt in ref.task.quiz.options],
            }
        return view

    def course_view(self) -> dict[str, Any]:
        current = self.current_ref().task_id
        sections = []
        for section in self.course.sections:
            lessons = []
            for lesson in section.lessons:
                tasks = []
                for task in lesson.tasks:
                    tid = f"{section.id}/{lesson.id}/{task.id}"
                    status = self.store.status_of(tid)
                    tasks.append(
                        {
                            "id": tid,
                            "title": task.title,
                            "kind": task.kind,
                            "status": status.value,
                            "status_color": status_color(status),
                            "current": tid == current,
                        }
                    )
                lessons.append(
                    {"id": lesson.id, "title": lesson.title, "kind": lesson.kind.value, "tasks": tasks}
                )
            sections.append({"id": section.id, "title": section.title, "lessons": lessons})
        summary = progress_summary(self.course, dict(self.store.statuses))
        return {
            "id": self.course.id,
            "title": self.course.title,
            "description": self.course.description,
            "subject_language": self.course.subject_language,
            "current_task": current,
            "sections": sections,
            "progress": {
                "total": summary.total,
                "solved": summary.solved,
                "failed": summary.failed,
                "percent_solved": float(summary.percent_solved),
            },
        }

    def progress_view(self) -> dict[str, Any]:
        summary = progress_summary(self.course, dict(self.store.statuses))
        stats = prog.usage_stats(self.store)
        return {
            "summary": {
                "total": summary.total,
                "solved": summary.solved,
                "failed": summary.failed,
                "percent_solved": float(summary.percent_solved),
            },
            "stats": {
                "checks": stats.checks,
                "solved_tasks": stats.solved_tasks,
                "events_by_kind": dict(stats.events_by_kind),
            },
            "statuses": {tid: status.value for tid, status in sorted(self.store.statuses.items())},
        }
