"""Learner workspace operations.

Materializes task templates into learner-facing file trees, relocates
placeholder spans inside learner-edited files, and propagates learner code
between adjacent tasks of a framework lesson.

A file tree is a plain ``dict[str, str]`` mapping relative paths to
LF-normalized content.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from difflib import SequenceMatcher
from enum import Enum

from .merge import merge3_text
from .model import Lesson, LessonKind, Task, TaskFile, normalize_text

FileTree = dict[str, str]


class Mode(str, Enum):
    LEARNER = "learner"
    AUTHOR = "author"


class WorkspaceError(Exception):
    pass


class PreconditionViolation(WorkspaceError):
    pass


class UnresolvablePlaceholder(WorkspaceError):
    """The learner edited outside the allowed region so heavily that the
    placeholder span cannot be attributed."""

    def __init__(self, placeholder_index: int, reason: str = "") -> None:
        self.placeholder_index = placeholder_index
        msg = f"placeholder {placeholder_index} cannot be located"
        super().__init__(f"{msg}: {reason}" if reason else msg)


@dataclass(frozen=True)
class PlaceholderSpan:
    """Character span of one placeholder inside a learner file."""

    path: str
    start: int
    end: int
    placeholder_index: int


@dataclass(frozen=True)
class PropagationConflict:
    path: str
    # Half-open 1-based line range in the merged file covering the learner
    # lines that were kept; start == end marks a dropped-hunk position.
    hunk_range: tuple[int, int]
    resolution: str = "kept_learner"


@dataclass(frozen=True)
class PropagationReport:
    merged: FileTree
    conflicts: tuple[PropagationConflict, ...]


def materialize_file(task_file: TaskFile) -> tuple[str, list[tuple[int, int]]]:
    """Learner view of one file: answer spans replaced by stub text.

    Returns the materialized text and the stub spans within it, in
    placeholder order.
    """
    template = task_file.template
    pieces: list[str] = []
    spans: list[tuple[int, int]] = []
    cursor = 0
    shift = 0
    for p in task_file.placeholders:
        pieces.append(template[cursor : p.offset])
        start = p.offset + shift
        pieces.append(p.stub_text)
        spans.append((start, start + len(p.stub_text)))
        cursor = p.offset + p.length
        shift += len(p.stub_text) - p.length
    pieces.append(template[cursor:])
    return "".join(pieces), spans


def materialize(task: Task, mode: Mode = Mode.LEARNER) -> FileTree:
    """Build the file tree for a task.

    Learner mode substitutes stubs and excludes hidden files; author mode
    returns every template verbatim. Theory and quiz tasks yield an empty
    tree.
    """
    if task.code is None:
        return {}
    tree: FileTree = {}
    for tf in task.code.files:
        if mode is Mode.AUTHOR:
            tree[tf.path] = tf.template
        elif tf.visible:
            tree[tf.path], _ = materialize_file(tf)
    return tree


def reset_task(task: Task) -> FileTree:
    """Fresh learner materialization; callers persist history before discarding."""
    return materialize(task, Mode.LEARNER)


def _line_starts(lines: list[str]) -> list[int]:
    starts = [0]
    for line in lines:
        starts.append(starts[-1] + len(line))
    return starts


def locate_placeholders(learner_file: str, task_file: TaskFile) -> list[PlaceholderSpan]:
    """Find each placeholder's span inside a learner-edited file.

    Computes a line diff between the pristine learner materialization and
    the edited file, then maps every stub span through it. Each span is
    pinned between its nearest unchanged lines (file boundaries act as
    anchors for fully-changed files) and the exact context text between
    anchor and span. Raises :class:`UnresolvablePlaceholder` when that
    context no longer identifies the span uniquely.
    """
    if not task_file.placeholders:
        raise PreconditionViolation(f"{task_file.path} has no placeholders")
    pristine, stub_spans = materialize_file(task_file)
    learner = normalize_text(learner_file)
    path = task_file.path

    if learner == pristine:
        return [
            PlaceholderSpan(path, s, e, i) for i, (s, e) in enumerate(stub_spans)
        ]

    m_lines = pristine.splitlines(keepends=True)
    l_lines = learner.splitlines(keepends=True)
    m_starts = _line_starts(m_lines)
    l_starts = _line_starts(l_lines)

    sm = SequenceMatcher(None, m_lines, l_lines, autojunk=False)
    equal: dict[int, int] = {}
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            for k in range(i2 - i1):
                equal[i1 + k] = j1 + k

    def line_of(pos: int) -> int:
        # index of the line containing character pos (pos < len(pristine))
        return bisect.bisect_right(m_starts, pos) - 1

    spans: list[PlaceholderSpan] = []
    prev_m_end = 0
    prev_l_end = 0
    for idx, (s, e) in enumerate(stub_spans):
        first_line = line_of(s)
        last_line = line_of(e - 1)

        # Nearest unchanged line above (end positions) and below (start
        # positions); fall back to the file boundaries.
        above_m, above_l = 0, 0
        for ln in range(first_line - 1, -1, -1):
            if ln in equal:
                above_m = m_starts[ln + 1]
                above_l = l_starts[equal[ln] + 1]
                break
        below_m, below_l = len(pristine), len(learner)
        for ln in range(last_line + 1, len(m_lines)):
            if ln in equal:
                below_m = m_starts[ln]
                below_l = l_starts[equal[ln]]
                break

        # Left edge: context between the previous placeholder (or the anchor)
        # and this span must match exactly.
        if prev_m_end > above_m:
            head = pristine[prev_m_end:s]
            base_l = prev_l_end
        else:
            head = pristine[above_m:s]
            base_l = max(above_l, prev_l_end)
        if not learner.startswith(head, base_l):
            raise UnresolvablePlaceholder(idx, "leading context not found")
        start = base_l + len(head)
        if start < prev_l_end:
            raise UnresolvablePlaceholder(idx, "span overlaps the previous placeholder")

        # Right edge: pinned against the anchor below when no other
        # placeholder intervenes, otherwise located by the unique occurrence
        # of the separating context.
        next_s = stub_spans[idx + 1][0] if idx + 1 < len(stub_spans) else len(pristine)
        if below_m <= next_s:
            tail = pristine[e:below_m]
            end = below_l - len(tail)
            if end < start or learner[end:below_l] != tail:
                raise UnresolvablePlaceholder(idx, "trailing context not found")
        else:
            tail = pristine[e:next_s]
            window = learner[start:below_l]
            if not tail:
                raise UnresolvablePlaceholder(idx, "adjacent placeholders cannot be separated")
            if window.count(tail) != 1:
                raise UnresolvablePlaceholder(idx, "trailing context is not unique")
            end = start + window.index(tail)

        spans.append(PlaceholderSpan(path, start, end, idx))
        prev_m_end = e
        prev_l_end = end
    return spans


def propagate(
    lesson: Lesson, from_index: int, to_index: int, learner_tree: FileTree
) -> PropagationReport:
    """Carry the learner's working tree from one framework task to an
    adjacent one by replaying the author's template diff over it.

    Conflicting regions keep the learner's lines and are reported; learner
    edits outside changed regions always survive. Hidden files are never
    propagated.
    """
    if lesson.kind is not LessonKind.FRAMEWORK:
        raise PreconditionViolation(f"lesson '{lesson.id}' is not a framework lesson")
    if abs(to_index - from_index) != 1:
        raise PreconditionViolation("propagation only moves between adjacent tasks")
    if not (0 <= from_index < len(lesson.tasks) and 0 <= to_index < len(lesson.tasks)):
        raise PreconditionViolation("task index out of range")

    from_tree = materialize(lesson.tasks[from_index], Mode.LEARNER)
    to_tree = materialize(lesson.tasks[to_index], Mode.LEARNER)
    missing = sorted(set(from_tree) - set(learner_tree))
    if missing:
        raise PreconditionViolation(f"learner tree is missing files: {', '.join(missing)}")

    merged: FileTree = {}
    conflicts: list[PropagationConflict] = []
    for path, b_text in to_tree.items():
        a_text = from_tree[path]
        l_text = learner_tree[path]
        if a_text == b_text:
            merged[path] = l_text
            continue
        result = merge3_text(a_text, l_text, b_text)
        merged[path] = result.text
        for start, end in result.conflicts:
            conflicts.append(PropagationConflict(path, (start + 1, end + 1)))
    # Learner-created files outside the task's file set carry over untouched.
    for path, content in learner_tree.items():
        if path not in merged:
            merged[path] = content
    return PropagationReport(merged, tuple(conflicts))
