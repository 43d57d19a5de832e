"""Domain model for interactive courses.

The course tree (course / section / lesson / task), task payloads (quiz,
code, placeholders), checker descriptions, check results, and the pure
queries over them: validation, progress summaries, and status colors.

All types are plain immutable values; nothing here touches the filesystem.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from typing import Any, Iterator, Mapping

ID_RE = re.compile(r"^[a-z0-9-]{1,64}$")

CURRENT_FORMAT_VERSION = 1

INDENT_SIZE_RANGE = (1, 16)
MAX_BLANK_LINES_RANGE = (0, 10)
MAX_LINE_LENGTH_RANGE = (40, 500)
COMMAND_TIMEOUT_RANGE = (1, 600)


def normalize_text(text: str) -> str:
    """Normalize line endings to LF; engine-internal text never contains CR."""
    return text.replace("\r\n", "\n").replace("\r", "\n")


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class TaskStatus(str, Enum):
    NOT_STARTED = "not_started"
    IN_PROGRESS = "in_progress"
    SOLVED = "solved"
    FAILED = "failed"


_STATUS_COLORS = {
    TaskStatus.SOLVED: "green",
    TaskStatus.FAILED: "red",
    TaskStatus.NOT_STARTED: "gray",
    TaskStatus.IN_PROGRESS: "blue",
}


def status_color(status: TaskStatus) -> str:
    """Map a task status to the tree color shown in the UI."""
    return _STATUS_COLORS[status]


class LessonKind(str, Enum):
    PLAIN = "plain"
    FRAMEWORK = "framework"


class QuizMode(str, Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"


class CheckStatus(str, Enum):
    SOLVED = "solved"
    FAILED = "failed"
    ERROR = "error"


@dataclass(frozen=True)
class Placeholder:
    """An author-defined answer span inside a task file template.

    The answer text is ``template[offset : offset + length]``; offsets count
    Unicode scalar values over LF-normalized text. ``stub_text`` is what the
    learner sees in place of the answer.
    """

    offset: int
    length: int
    stub_text: str
    hints: tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskFile:
    """One file of a code task. Hidden files (tests) never reach the learner."""

    path: str
    template: str
    visible: bool = True
    placeholders: tuple[Placeholder, ...] = ()

    def answer_text(self, index: int) -> str:
        p = self.placeholders[index]
        return self.template[p.offset : p.offset + p.length]


@dataclass(frozen=True)
class IoCase:
    stdin: str
    expected_stdout: str


@dataclass(frozen=True)
class OutputCompareChecker:
    """Run a named run configuration per case, compare normalized stdout."""

    run: str
    cases: tuple[IoCase, ...]


@dataclass(frozen=True)
class CommandChecker:
    """Run an author-provided command; a result file or the exit code decides."""

    command: tuple[str, ...]
    timeout_seconds: int = 60


@dataclass(frozen=True)
class DeclaresFunction:
    name: str
    arity: int | None = None


@dataclass(frozen=True)
class DeclaresType:
    name: str


@dataclass(frozen=True)
class MaxLineLength:
    limit: int


@dataclass(frozen=True)
class IndentMultipleOf:
    n: int


@dataclass(frozen=True)
class MaxBlankLines:
    limit: int


Assertion = DeclaresFunction | DeclaresType | MaxLineLength | IndentMultipleOf | MaxBlankLines


@dataclass(frozen=True)
class StructuralChecker:
    """Assertions over extracted symbols and formatting; the reference solution
    never ships to the learner."""

    assertions: tuple[Assertion, ...]
    profile: str


class MatchNormalize(str, Enum):
    EXACT = "exact"
    TOKEN_WHITESPACE = "token_whitespace"


@dataclass(frozen=True)
class PlaceholderMatchChecker:
    normalize: MatchNormalize = MatchNormalize.EXACT


CheckerSpec = OutputCompareChecker | CommandChecker | StructuralChecker | PlaceholderMatchChecker


@dataclass(frozen=True)
class QuizOption:
    text: str
    correct: bool = False
    feedback: str | None = None


@dataclass(frozen=True)
class QuizSpec:
    mode: QuizMode
    options: tuple[QuizOption, ...]
    correct_feedback: str | None = None

    def correct_indices(self) -> frozenset[int]:
        return frozenset(i for i, opt in enumerate(self.options) if opt.correct)


@dataclass(frozen=True)
class CodeSpec:
    files: tuple[TaskFile, ...]
    checker: CheckerSpec

    def visible_files(self) -> tuple[TaskFile, ...]:
        return tuple(f for f in self.files if f.visible)

    def visible_paths(self) -> frozenset[str]:
        return frozenset(f.path for f in self.files if f.visible)


@dataclass(frozen=True)
class Task:
    """A course task: theory, quiz, or code, depending on the payload."""

    id: str
    title: str
    description: str
    quiz: QuizSpec | None = None
    code: CodeSpec | None = None

    @property
    def kind(self) -> str:
        if self.quiz is not None:
            return "quiz"
        if self.code is not None:
            return "code"
        return "theory"


@dataclass(frozen=True)
class Lesson:
    id: str
    title: str
    kind: LessonKind
    tasks: tuple[Task, ...]


@dataclass(frozen=True)
class Section:
    id: str
    title: str
    lessons: tuple[Lesson, ...]


@dataclass(frozen=True)
class StyleRules:
    """Course-level formatting rules applied to learner code during checks."""

    indent_size: int | None = None
    max_blank_lines: int | None = None
    max_line_length: int | None = None


@dataclass(frozen=True)
class RunConfig:
    """An author-named command used to run learner programs."""

    name: str
    command: tuple[str, ...]
    working_dir: str | None = None
    env: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Course:
    id: str
    title: str
    description: str
    subject_language: str
    sections: tuple[Section, ...]
    style_rules: StyleRules | None = None
    run_configs: tuple[RunConfig, ...] = ()
    format_version: int = CURRENT_FORMAT_VERSION


@dataclass(frozen=True)
class CheckDetails:
    first_diff_line: int | None = None
    expected_excerpt: str | None = None
    actual_excerpt: str | None = None
    violations: tuple[str, ...] = ()
    extra: Any = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.first_diff_line is not None:
            out["first_diff_line"] = self.first_diff_line
        if self.expected_excerpt is not None:
            out["expected_excerpt"] = self.expected_excerpt
        if self.actual_excerpt is not None:
            out["actual_excerpt"] = self.actual_excerpt
        if self.violations:
            out["violations"] = list(self.violations)
        if self.extra is not None:
            out["extra"] = self.extra
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CheckDetails":
        return cls(
            first_diff_line=data.get("first_diff_line"),
            expected_excerpt=data.get("expected_excerpt"),
            actual_excerpt=data.get("actual_excerpt"),
            violations=tuple(data.get("violations", ())),
            extra=data.get("extra"),
        )


@dataclass(frozen=True)
class CheckResult:
    """Outcome of checking one task. ``message`` is learner-facing feedback."""

    status: CheckStatus
    message: str
    details: CheckDetails | None = None
    checked_at: str = field(default_factory=utc_now_iso)

    def __post_init__(self) -> None:
        if self.status is not CheckStatus.SOLVED and not self.message:
            raise ValueError("non-solved check results need a message")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "status": self.status.value,
            "message": self.message,
            "checked_at": self.checked_at,
        }
        if self.details is not None:
            out["details"] = self.details.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CheckResult":
        details = data.get("details")
        return cls(
            status=CheckStatus(data["status"]),
            message=data.get("message", ""),
            details=CheckDetails.from_dict(details) if details is not None else None,
            checked_at=data.get("checked_at", ""),
        )


@dataclass(frozen=True)
class Violation:
    """One validation finding, with a stable machine-readable code."""

    code: str
    path: str
    message: str


def task_path(section: Section, lesson: Lesson, task: Task) -> str:
    return f"{section.id}/{lesson.id}/{task.id}"


def iter_tasks(course: Course) -> Iterator[tuple[str, Section, Lesson, Task]]:
    """Yield tasks in course order (depth-first) with their slash-path ids."""
    for section in course.sections:
        for lesson in section.lessons:
            for task in lesson.tasks:
                yield task_path(section, lesson, task), section, lesson, task


def find_task(course: Course, path: str) -> tuple[Section, Lesson, Task] | None:
    for tid, section, lesson, task in iter_tasks(course):
        if tid == path:
            return section, lesson, task
    return None


def is_safe_relative_path(path: str) -> bool:
    """True for normalized relative POSIX paths without '..' segments."""
    if not path or path.startswith("/") or "\\" in path:
        return False
    parts = path.split("/")
    if any(part in ("", ".", "..") for part in parts):
        return False
    return posixpath.normpath(path) == path


_RESERVED_TASK_FILES = {"task.yaml", "task.md"}


def _validate_placeholders(tf: TaskFile, where: str, out: list[Violation]) -> None:
    prev_end = 0
    prev_offset = -1
    for i, p in enumerate(tf.placeholders):
        loc = f"{where}[{i}]"
        if p.length < 1:
            out.append(Violation("placeholder_zero_length", loc, "placeholder length must be >= 1"))
        if not p.stub_text:
            out.append(Violation("placeholder_empty_stub", loc, "placeholder stub_text must be non-empty"))
        if p.offset < 0 or p.offset + p.length > len(tf.template):
            out.append(
                Violation(
                    "placeholder_out_of_bounds",
                    loc,
                    f"span [{p.offset}, {p.offset + p.length}) exceeds template of "
                    f"{len(tf.template)} characters",
                )
            )
            continue
        if p.offset < prev_offset:
            out.append(Violation("placeholder_not_sorted", loc, "placeholders must be sorted by offset"))
        elif p.offset < prev_end:
            out.append(Violation("placeholder_overlap", loc, "placeholder overlaps the previous one"))
        prev_offset = p.offset
        prev_end = max(prev_end, p.offset + p.length)


def _validate_checker(
    checker: CheckerSpec, where: str, run_config_names: set[str], out: list[Violation]
) -> None:
    if isinstance(checker, OutputCompareChecker):
        if not checker.cases:
            out.append(Violation("checker_no_cases", where, "output checker needs at least one case"))
        if checker.run not in run_config_names:
            out.append(
                Violation(
                    "unknown_run_config", where, f"checker references unknown run config '{checker.run}'"
                )
            )
    elif isinstance(checker, CommandChecker):
        if not checker.command:
            out.append(Violation("checker_empty_command", where, "checker command must be non-empty"))
        lo, hi = COMMAND_TIMEOUT_RANGE
        if not (lo <= checker.timeout_seconds <= hi):
            out.append(
                Violation(
                    "checker_timeout_out_of_range",
                    where,
                    f"timeout_seconds must be within [{lo}, {hi}]",
                )
            )
    elif isinstance(checker, StructuralChecker):
        if not checker.assertions:
            out.append(Violation("checker_no_assertions", where, "structural checker needs assertions"))
        for i, a in enumerate(checker.assertions):
            if isinstance(a, (DeclaresFunction, DeclaresType)) and not a.name:
                out.append(Violation("assertion_empty_name", f"{where}[{i}]", "assertion name is empty"))


def _validate_task(task: Task, where: str, run_config_names: set[str], out: list[Violation]) -> None:
    if not ID_RE.match(task.id):
        out.append(Violation("bad_task_id", where, f"task id '{task.id}' is not a valid identifier"))
    if not task.description.strip():
        out.append(Violation("empty_task_description", where, "task description must be non-empty"))
    if task.quiz is not None and task.code is not None:
        out.append(Violation("ambiguous_task_kind", where, "task cannot be both quiz and code"))

    if task.quiz is not None:
        quiz = task.quiz
        if len(quiz.options) < 2:
            out.append(Violation("quiz_too_few_options", where, "quizzes need at least two options"))
        n_correct = len(quiz.correct_indices())
        if quiz.mode is QuizMode.SINGLE and n_correct != 1:
            out.append(
                Violation("quiz_correct_count", where, "single-choice quizzes need exactly one correct option")
            )
        if quiz.mode is QuizMode.MULTIPLE and n_correct < 1:
            out.append(
                Violation("quiz_correct_count", where, "multiple-choice quizzes need a correct option")
            )

    if task.code is not None:
        code = task.code
        if not code.visible_files():
            out.append(Violation("code_no_visible_file", where, "code tasks need at least one visible file"))
        seen: set[str] = set()
        for tf in code.files:
            floc = f"{where}#{tf.path}"
            if not is_safe_relative_path(tf.path):
                out.append(Violation("bad_file_path", floc, f"file path '{tf.path}' is not a safe relative path"))
            if tf.path in _RESERVED_TASK_FILES:
                out.append(Violation("reserved_file_path", floc, f"'{tf.path}' is reserved for task metadata"))
            if tf.path in seen:
                out.append(Violation("duplicate_file_path", floc, f"duplicate file path '{tf.path}'"))
            seen.add(tf.path)
            if "\r" in tf.template:
                out.append(Violation("template_not_normalized", floc, "template contains CR characters"))
            if not tf.visible and tf.placeholders:
                out.append(Violation("hidden_file_placeholder", floc, "hidden files cannot have placeholders"))
            _validate_placeholders(tf, floc, out)
        _validate_checker(code.checker, where, run_config_names, out)


def _validate_style(rules: StyleRules, out: list[Violation]) -> None:
    checks = (
        ("indent_size", rules.indent_size, INDENT_SIZE_RANGE),
        ("max_blank_lines", rules.max_blank_lines, MAX_BLANK_LINES_RANGE),
        ("max_line_length", rules.max_line_length, MAX_LINE_LENGTH_RANGE),
    )
    for name, value, (lo, hi) in checks:
        if value is not None and not (lo <= value <= hi):
            out.append(
                Violation("style_rule_out_of_range", "", f"style rule {name}={value} outside [{lo}, {hi}]")
            )


def validate_course(course: Course) -> list[Violation]:
    """Check every structural invariant; an empty list means the course is valid."""
    out: list[Violation] = []
    if not ID_RE.match(course.id):
        out.append(Violation("bad_course_id", "", f"course id '{course.id}' is not a valid identifier"))
    if not course.sections:
        out.append(Violation("empty_course", "", "course has no sections"))

    run_config_names: set[str] = set()
    for rc in course.run_configs:
        if rc.name in run_config_names:
            out.append(Violation("duplicate_run_config", "", f"duplicate run config '{rc.name}'"))
        run_config_names.add(rc.name)
        if not rc.command:
            out.append(Violation("empty_run_config_command", "", f"run config '{rc.name}' has no command"))
        if rc.working_dir is not None and not is_safe_relative_path(rc.working_dir):
            out.append(
                Violation("bad_working_dir", "", f"run config '{rc.name}' working_dir is not a safe relative path")
            )
    if course.style_rules is not None:
        _validate_style(course.style_rules, out)

    section_ids: set[str] = set()
    for section in course.sections:
        sloc = section.id
        if not ID_RE.match(section.id):
            out.append(Violation("bad_section_id", sloc, f"section id '{section.id}' is not a valid identifier"))
        if section.id in section_ids:
            out.append(Violation("duplicate_section_id", sloc, f"duplicate section id '{section.id}'"))
        section_ids.add(section.id)
        if not section.lessons:
            out.append(Violation("empty_section", sloc, "section has no lessons"))

        lesson_ids: set[str] = set()
        for lesson in section.lessons:
            lloc = f"{section.id}/{lesson.id}"
            if not ID_RE.match(lesson.id):
                out.append(Violation("bad_lesson_id", lloc, f"lesson id '{lesson.id}' is not a valid identifier"))
            if lesson.id in lesson_ids:
                out.append(Violation("duplicate_lesson_id", lloc, f"duplicate lesson id '{lesson.id}'"))
            lesson_ids.add(lesson.id)
            if not lesson.tasks:
                out.append(Violation("empty_lesson", lloc, "lesson has no tasks"))

            task_ids: set[str] = set()
            for task in lesson.tasks:
                tloc = f"{lloc}/{task.id}"
                if task.id in task_ids:
                    out.append(Violation("duplicate_task_id", tloc, f"duplicate task id '{task.id}'"))
                task_ids.add(task.id)
                _validate_task(task, tloc, run_config_names, out)

            if lesson.kind is LessonKind.FRAMEWORK:
                non_code = [t.id for t in lesson.tasks if t.code is None]
                if non_code:
                    out.append(
                        Violation(
                            "framework_non_code_task",
                            lloc,
                            f"framework lessons allow only code tasks, got: {', '.join(non_code)}",
                        )
                    )
                visible_sets = {t.code.visible_paths() for t in lesson.tasks if t.code is not None}
                if len(visible_sets) > 1:
                    out.append(
                        Violation(
                            "framework_file_mismatch",
                            lloc,
                            "framework tasks must declare the same set of visible file paths",
                        )
                    )
    return out


@dataclass(frozen=True)
class ProgressSummary:
    total: int
    solved: int
    failed: int
    percent_solved: Fraction


def progress_summary(course: Course, statuses: Mapping[str, TaskStatus]) -> ProgressSummary:
    """Summarize task statuses over the course; unknown task ids are ignored
    (progress files may outlive course edits)."""
    task_ids = [tid for tid, _, _, _ in iter_tasks(course)]
    if not task_ids:
        raise ValueError("course has no tasks")
    solved = sum(1 for tid in task_ids if statuses.get(tid) is TaskStatus.SOLVED)
    failed = sum(1 for tid in task_ids if statuses.get(tid) is TaskStatus.FAILED)
    return ProgressSummary(
        total=len(task_ids),
        solved=solved,
        failed=failed,
        percent_solved=Fraction(solved, len(task_ids)),
    )
