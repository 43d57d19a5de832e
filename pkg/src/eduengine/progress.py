"""Per-session learner state.

A session directory holds a ``progress.json`` snapshot (statuses, current
task, submission history) and an append-only ``events.jsonl`` usage log,
one JSON object per line with ``ts``, ``kind``, and ``task_id`` fields.
Keeping events out of the snapshot makes them survive snapshot corruption.

All operations are functional: they return a new store and never mutate
their input.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Collection, Iterable, Mapping

from .model import CheckResult, CheckStatus, TaskStatus, utc_now_iso

logger = logging.getLogger(__name__)

PROGRESS_FILE = "progress.json"
EVENTS_FILE = "events.jsonl"
STORE_FORMAT_VERSION = 1

_SNAPSHOT_KEYS = {"course_id", "format_version", "statuses", "current_task", "submissions"}


class ProgressError(Exception):
    pass


class UnknownTask(ProgressError):
    def __init__(self, task_id: str) -> None:
        self.task_id = task_id
        super().__init__(f"unknown task: {task_id}")


class EventKind(str, Enum):
    COURSE_OPENED = "course_opened"
    TASK_VIEWED = "task_viewed"
    CHECK_RUN = "check_run"
    TASK_SOLVED = "task_solved"
    NAVIGATED_NEXT = "navigated_next"
    NAVIGATED_PREV = "navigated_prev"
    TASK_RESET = "task_reset"


@dataclass(frozen=True)
class UsageEvent:
    ts: str
    kind: EventKind
    task_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"ts": self.ts, "kind": self.kind.value, "task_id": self.task_id}


@dataclass(frozen=True)
class Submission:
    task_id: str
    timestamp: str
    result: CheckResult
    quiz_selection: tuple[int, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "task_id": self.task_id,
            "timestamp": self.timestamp,
            "result": self.result.to_dict(),
        }
        if self.quiz_selection is not None:
            out["quiz_selection"] = list(self.quiz_selection)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Submission":
        selection = data.get("quiz_selection")
        return cls(
            task_id=data["task_id"],
            timestamp=data.get("timestamp", ""),
            result=CheckResult.from_dict(data["result"]),
            quiz_selection=tuple(selection) if selection is not None else None,
        )


@dataclass(frozen=True)
class ProgressStore:
    course_id: str
    format_version: int = STORE_FORMAT_VERSION
    statuses: Mapping[str, TaskStatus] = field(default_factory=dict)
    current_task: str | None = None
    submissions: tuple[Submission, ...] = ()
    events: tuple[UsageEvent, ...] = ()
    # Unknown snapshot fields, preserved verbatim on rewrite.
    extra: Mapping[str, Any] = field(default_factory=dict)

    def status_of(self, task_id: str) -> TaskStatus:
        return self.statuses.get(task_id, TaskStatus.NOT_STARTED)


def _append_events(store: ProgressStore, events: Iterable[UsageEvent]) -> tuple[UsageEvent, ...]:
    return store.events + tuple(events)


def _check_known(task_id: str, valid_task_ids: Collection[str] | None) -> None:
    if valid_task_ids is not None and task_id not in valid_task_ids:
        raise UnknownTask(task_id)


def record_check(
    store: ProgressStore,
    task_id: str,
    result: CheckResult,
    selection: Iterable[int] | None = None,
    valid_task_ids: Collection[str] | None = None,
) -> ProgressStore:
    """Append a submission and update the task status; the latest check wins.
    Error results leave the status untouched."""
    _check_known(task_id, valid_task_ids)
    ts = result.checked_at
    submission = Submission(
        task_id=task_id,
        timestamp=ts,
        result=result,
        quiz_selection=tuple(sorted(selection)) if selection is not None else None,
    )
    statuses = dict(store.statuses)
    events = [UsageEvent(ts, EventKind.CHECK_RUN, task_id)]
    if result.status is CheckStatus.SOLVED:
        if statuses.get(task_id) is not TaskStatus.SOLVED:
            events.append(UsageEvent(ts, EventKind.TASK_SOLVED, task_id))
        statuses[task_id] = TaskStatus.SOLVED
    elif result.status is CheckStatus.FAILED:
        statuses[task_id] = TaskStatus.FAILED
    return replace(
        store,
        statuses=statuses,
        submissions=store.submissions + (submission,),
        events=_append_events(store, events),
    )


def mark_viewed(
    store: ProgressStore, task_id: str, valid_task_ids: Collection[str] | None = None
) -> ProgressStore:
    """Move a not-started task to in-progress; never demotes other statuses."""
    _check_known(task_id, valid_task_ids)
    statuses = dict(store.statuses)
    if statuses.get(task_id, TaskStatus.NOT_STARTED) is TaskStatus.NOT_STARTED:
        statuses[task_id] = TaskStatus.IN_PROGRESS
    return replace(
        store,
        statuses=statuses,
        events=_append_events(store, [UsageEvent(utc_now_iso(), EventKind.TASK_VIEWED, task_id)]),
    )


def record_navigation(store: ProgressStore, task_id: str, forward: bool) -> ProgressStore:
    kind = EventKind.NAVIGATED_NEXT if forward else EventKind.NAVIGATED_PREV
    return replace(
        store,
        current_task=task_id,
        events=_append_events(store, [UsageEvent(utc_now_iso(), kind, task_id)]),
    )


def record_reset(
    store: ProgressStore, task_id: str, valid_task_ids: Collection[str] | None = None
) -> ProgressStore:
    _check_known(task_id, valid_task_ids)
    statuses = dict(store.statuses)
    statuses[task_id] = TaskStatus.NOT_STARTED
    return replace(
        store,
        statuses=statuses,
        events=_append_events(store, [UsageEvent(utc_now_iso(), EventKind.TASK_RESET, task_id)]),
    )


def record_course_opened(store: ProgressStore) -> ProgressStore:
    return replace(
        store,
        events=_append_events(store, [UsageEvent(utc_now_iso(), EventKind.COURSE_OPENED)]),
    )


def set_current_task(store: ProgressStore, task_id: str | None) -> ProgressStore:
    return replace(store, current_task=task_id)


# ---------------------------------------------------------------------------
# persistence


def save_store(store: ProgressStore, session_dir: Path | str) -> None:
    """Write the snapshot and append any new events to the log."""
    session_dir = Path(session_dir)
    session_dir.mkdir(parents=True, exist_ok=True)
    snapshot: dict[str, Any] = {
        "course_id": store.course_id,
        "format_version": store.format_version,
        "current_task": store.current_task,
        "statuses": {tid: status.value for tid, status in sorted(store.statuses.items())},
        "submissions": [s.to_dict() for s in store.submissions],
    }
    for key, value in store.extra.items():
        snapshot.setdefault(key, value)
    (session_dir / PROGRESS_FILE).write_text(
        json.dumps(snapshot, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    # count what a reader would actually recover, so a corrupt line never
    # causes newer events to be skipped
    events_path = session_dir / EVENTS_FILE
    existing = len(_load_events(events_path))
    if existing < len(store.events):
        with events_path.open("a", encoding="utf-8") as fh:
            for event in store.events[existing:]:
                fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")


def _load_events(events_path: Path) -> tuple[UsageEvent, ...]:
    if not events_path.is_file():
        return ()
    events: list[UsageEvent] = []
    for lineno, line in enumerate(events_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            events.append(UsageEvent(ts=data["ts"], kind=EventKind(data["kind"]), task_id=data.get("task_id")))
        except (ValueError, KeyError, TypeError):
            logger.warning("skipping unreadable event at %s:%d", events_path, lineno)
    return tuple(events)


def load_store(session_dir: Path | str, course_id: str = "") -> ProgressStore:
    """Load the session store.

    A corrupt snapshot is backed up as ``progress.json.corrupt-<stamp>`` and
    a fresh store is returned; events always survive independently.
    """
    session_dir = Path(session_dir)
    events = _load_events(session_dir / EVENTS_FILE)
    snapshot_path = session_dir / PROGRESS_FILE
    if not snapshot_path.is_file():
        return ProgressStore(course_id=course_id, events=events)

    try:
        data = json.loads(snapshot_path.read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError("snapshot must be a JSON object")
        if int(data.get("format_version", STORE_FORMAT_VERSION)) > STORE_FORMAT_VERSION:
            raise ValueError("snapshot format version is newer than supported")
        statuses = {}
        for tid, raw in dict(data.get("statuses", {})).items():
            try:
                statuses[str(tid)] = TaskStatus(raw)
            except ValueError:
                logger.warning("skipping unknown status %r for task %s", raw, tid)
        submissions = tuple(Submission.from_dict(s) for s in data.get("submissions", []))
    except (ValueError, KeyError, TypeError) as exc:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%d%H%M%S%f")
        backup = snapshot_path.with_name(f"{PROGRESS_FILE}.corrupt-{stamp}")
        snapshot_path.rename(backup)
        logger.warning("corrupt progress snapshot backed up to %s (%s); starting fresh", backup, exc)
        return ProgressStore(course_id=course_id, events=events)

    extra = {k: v for k, v in data.items() if k not in _SNAPSHOT_KEYS}
    return ProgressStore(
        course_id=str(data.get("course_id", course_id)),
        format_version=int(data.get("format_version", STORE_FORMAT_VERSION)),
        statuses=statuses,
        current_task=data.get("current_task"),
        submissions=submissions,
        events=events,
        extra=extra,
    )


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class UsageStats:
    checks: int
    solved_tasks: int
    events_by_kind: Mapping[str, int]


def usage_stats(store: ProgressStore) -> UsageStats:
    by_kind: dict[str, int] = {}
    for event in store.events:
        by_kind[event.kind.value] = by_kind.get(event.kind.value, 0) + 1
    return UsageStats(
        checks=by_kind.get(EventKind.CHECK_RUN.value, 0),
        solved_tasks=sum(1 for s in store.statuses.values() if s is TaskStatus.SOLVED),
        events_by_kind=by_kind,
    )


def replay_statuses(events: Iterable[UsageEvent]) -> dict[str, TaskStatus]:
    """Reconstruct the statuses derivable from the event log alone.

    Viewed, solved, and reset transitions are replayable; a plain check-run
    carries no verdict in the log, so failures are only visible in the
    snapshot's submission history.
    """
    statuses: dict[str, TaskStatus] = {}
    for event in events:
        tid = event.task_id
        if tid is None:
            continue
        if event.kind is EventKind.TASK_VIEWED:
            if statuses.get(tid, TaskStatus.NOT_STARTED) is TaskStatus.NOT_STARTED:
                statuses[tid] = TaskStatus.IN_PROGRESS
        elif event.kind is EventKind.TASK_SOLVED:
            statuses[tid] = TaskStatus.SOLVED
        elif event.kind is EventKind.TASK_RESET:
            statuses[tid] = TaskStatus.NOT_STARTED
    return statuses
