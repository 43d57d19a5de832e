"""Solution checking.

Quiz grading, program-output comparison, the external checker-command
protocol, placeholder matching, and structural assertions over lexically
extracted symbols. Structural checks deliberately never echo learner or
reference code into feedback, so reference solutions stay hidden.

External checkers communicate through a JSON result file: the command runs
with ``EDU_RESULT_FILE`` pointing at a fresh path; if it writes
``{"status": "solved"|"failed", "message": ..., "details": ...}`` there,
that verdict is authoritative regardless of the exit code.
"""

from __future__ import annotations

import json
import os
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import (
    Assertion,
    CheckDetails,
    CheckResult,
    CheckStatus,
    CommandChecker,
    DeclaresFunction,
    DeclaresType,
    IndentMultipleOf,
    MatchNormalize,
    MaxBlankLines,
    MaxLineLength,
    OutputCompareChecker,
    PlaceholderMatchChecker,
    QuizMode,
    QuizSpec,
    RunConfig,
    StructuralChecker,
    StyleRules,
    Task,
    TaskFile,
    normalize_text,
)
from .workspace import FileTree, UnresolvablePlaceholder, locate_placeholders, materialize, Mode

RESULT_FILE_ENV = "EDU_RESULT_FILE"
OUTPUT_CAP_BYTES = 1 << 20
DEFAULT_CASE_TIMEOUT = 30.0
DEFAULT_COMMAND_TIMEOUT = 60

_KEPT_ENV = ("PATH", "HOME", "TMPDIR", "TEMP", "TMP", "LANG", "LC_ALL", "SYSTEMROOT")


class CheckerError(Exception):
    pass


class QuizSelectionError(CheckerError):
    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# quiz grading


def grade_quiz(spec: QuizSpec, selected: Iterable[int]) -> CheckResult:
    """Grade a selection against the correct option set.

    On failure the feedback comes from the lowest-index option that was
    either wrongly selected or wrongly omitted.
    """
    chosen = frozenset(selected)
    for index in chosen:
        if not (0 <= index < len(spec.options)):
            raise QuizSelectionError("index_out_of_range", f"option index {index} out of range")
    if spec.mode is QuizMode.SINGLE and len(chosen) != 1:
        raise QuizSelectionError(
            "single_choice_cardinality", "single-choice quizzes take exactly one selection"
        )
    correct = spec.correct_indices()
    if chosen == correct:
        return CheckResult(CheckStatus.SOLVED, spec.correct_feedback or "Correct!")
    mishandled = min(chosen.symmetric_difference(correct))
    feedback = spec.options[mishandled].feedback or "Incorrect answer."
    return CheckResult(CheckStatus.FAILED, feedback)


# ---------------------------------------------------------------------------
# output comparison


@dataclass(frozen=True)
class OutputComparison:
    equal: bool
    first_diff_line: int | None = None


def _normalized_lines(text: str) -> list[str]:
    lines = [line.rstrip() for line in normalize_text(text).split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return lines


def compare_output(actual: str, expected: str) -> OutputComparison:
    """Compare program output, ignoring CRLF, trailing whitespace on each
    line, and trailing blank lines. ``first_diff_line`` is 1-based over the
    normalized texts."""
    a = _normalized_lines(actual)
    e = _normalized_lines(expected)
    for i, (la, le) in enumerate(zip(a, e)):
        if la != le:
            return OutputComparison(False, i + 1)
    if len(a) != len(e):
        return OutputComparison(False, min(len(a), len(e)) + 1)
    return OutputComparison(True)


def _excerpt(text: str, limit: int = 20) -> str:
    lines = _normalized_lines(text)
    if len(lines) > limit:
        lines = lines[:limit] + ["..."]
    return "\n".join(lines)


def _tail_lines(text: str, limit: int = 20) -> str:
    lines = normalize_text(text).splitlines()
    return "\n".join(lines[-limit:])


def _scrubbed_env(extra: Mapping[str, str] | None = None) -> dict[str, str]:
    env = {key: os.environ[key] for key in _KEPT_ENV if key in os.environ}
    if extra:
        env.update(extra)
    return env


def run_output_cases(
    spec: OutputCompareChecker,
    workspace_dir: Path | str,
    run_configs: Sequence[RunConfig],
    case_timeout: float = DEFAULT_CASE_TIMEOUT,
) -> CheckResult:
    """Run the referenced run configuration once per case, feeding stdin and
    comparing stdout. The first failing case decides the verdict."""
    workspace_dir = Path(workspace_dir)
    rc = next((r for r in run_configs if r.name == spec.run), None)
    if rc is None:
        return CheckResult(CheckStatus.ERROR, f"checker_unavailable: run config '{spec.run}' not found")
    cwd = workspace_dir / rc.working_dir if rc.working_dir else workspace_dir

    for i, case in enumerate(spec.cases, start=1):
        try:
            proc = subprocess.run(
                list(rc.command),
                input=case.stdin,
                capture_output=True,
                text=True,
                cwd=cwd,
                env=_scrubbed_env(rc.env),
                timeout=case_timeout,
            )
        except subprocess.TimeoutExpired:
            return CheckResult(
                CheckStatus.ERROR, f"run_timeout: case {i} exceeded {case_timeout:g} seconds"
            )
        except (OSError, ValueError) as exc:
            return CheckResult(CheckStatus.ERROR, f"checker_unavailable: {exc}")
        if proc.returncode != 0:
            return CheckResult(
                CheckStatus.FAILED,
                f"case {i} of {len(spec.cases)}: program exited with code {proc.returncode}",
                CheckDetails(actual_excerpt=_tail_lines(proc.stderr)),
            )
        cmp = compare_output(proc.stdout, case.expected_stdout)
        if not cmp.equal:
            return CheckResult(
                CheckStatus.FAILED,
                f"case {i} of {len(spec.cases)}: output mismatch",
                CheckDetails(
                    first_diff_line=cmp.first_diff_line,
                    expected_excerpt=_excerpt(case.expected_stdout),
                    actual_excerpt=_excerpt(proc.stdout),
                ),
            )
    return CheckResult(CheckStatus.SOLVED, f"All {len(spec.cases)} output cases passed.")


# ---------------------------------------------------------------------------
# external command checkers


def _parse_protocol_file(path: Path) -> CheckResult | None:
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        return CheckResult(CheckStatus.ERROR, f"checker_protocol_error: unreadable result file: {exc}")
    if not isinstance(data, dict) or data.get("status") not in ("solved", "failed"):
        return CheckResult(
            CheckStatus.ERROR, "checker_protocol_error: result file must carry status solved|failed"
        )
    status = CheckStatus.SOLVED if data["status"] == "solved" else CheckStatus.FAILED
    message = data.get("message") or ("" if status is CheckStatus.SOLVED else "Check failed.")
    details = data.get("details")
    return CheckResult(
        status,
        message if isinstance(message, str) else str(message),
        CheckDetails(extra=details) if details is not None else None,
    )


def run_command_checker(
    spec: CommandChecker,
    workspace_dir: Path | str,
    timeout_seconds: float | None = None,
) -> CheckResult:
    """Execute an author checker command in the workspace.

    A result file written to ``$EDU_RESULT_FILE`` is authoritative; without
    one, exit code 0 means solved and anything else fails with the tail of
    the combined output as the message.
    """
    workspace_dir = Path(workspace_dir)
    timeout = timeout_seconds if timeout_seconds is not None else (spec.timeout_seconds or DEFAULT_COMMAND_TIMEOUT)
    with tempfile.TemporaryDirectory(prefix="edu-check-") as scratch:
        result_path = Path(scratch) / "result.json"
        try:
            proc = subprocess.run(
                list(spec.command),
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                cwd=workspace_dir,
                env=_scrubbed_env({RESULT_FILE_ENV: str(result_path)}),
                timeout=timeout,
            )
        except subprocess.TimeoutExpired:
            return CheckResult(CheckStatus.ERROR, f"check_timeout: checker exceeded {timeout:g} seconds")
        except (OSError, ValueError) as exc:
            return CheckResult(CheckStatus.ERROR, f"checker_unavailable: {exc}")

        from_file = _parse_protocol_file(result_path)
        if from_file is not None:
            return from_file
        output = proc.stdout[-OUTPUT_CAP_BYTES:].decode("utf-8", errors="replace")
        if proc.returncode == 0:
            return CheckResult(CheckStatus.SOLVED, "All checks passed.")
        return CheckResult(
            CheckStatus.FAILED,
            _tail_lines(output) or f"checker exited with code {proc.returncode}",
        )


# ---------------------------------------------------------------------------
# symbol extraction


@dataclass(frozen=True)
class ProfileRule:
    kind: str  # "function" | "type"
    pattern: re.Pattern[str]


@dataclass(frozen=True)
class SymbolProfile:
    """Data-driven lexical rules mapping source lines to declared symbols."""

    key: str
    rules: tuple[ProfileRule, ...]


@dataclass(frozen=True)
class Symbol:
    kind: str
    name: str
    line: int
    path: str
    arity: int | None = None


def load_profile(path: Path | str) -> SymbolProfile:
    """Load ``profiles/<key>.yaml``; every rule pattern must compile and
    capture a ``name`` group."""
    from .courseformat import ParseError, _load_yaml  # local import avoids a cycle

    path = Path(path)
    data = _load_yaml(path)
    raw_rules = data.get("rules")
    if not isinstance(raw_rules, list) or not raw_rules:
        raise ParseError(path, "profile needs a non-empty 'rules' list")
    rules = []
    for rule in raw_rules:
        if not isinstance(rule, dict):
            raise ParseError(path, "each rule must be a mapping")
        kind = rule.get("kind")
        if kind not in ("function", "type"):
            raise ParseError(path, f"rule kind must be function|type, got {kind!r}")
        try:
            pattern = re.compile(rule.get("pattern", ""))
        except re.error as exc:
            raise ParseError(path, f"rule pattern does not compile: {exc}")
        if "name" not in pattern.groupindex:
            raise ParseError(path, "rule pattern must have a named capture 'name'")
        rules.append(ProfileRule(kind=kind, pattern=pattern))
    return SymbolProfile(key=path.stem, rules=tuple(rules))


def load_profiles(course_root: Path | str) -> dict[str, SymbolProfile]:
    profile_dir = Path(course_root) / "profiles"
    if not profile_dir.is_dir():
        return {}
    return {p.stem: load_profile(p) for p in sorted(profile_dir.glob("*.yaml"))}


def count_top_level_params(params: str) -> int:
    """Count comma-separated parameters, ignoring commas nested in brackets
    or quotes. Angle brackets count as nesting, which suits declaration
    heads even though it would misread comparison operators."""
    stripped = params.strip()
    if not stripped:
        return 0
    depth = 0
    quote: str | None = None
    count = 1
    for ch in stripped:
        if quote is not None:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch in "([{<":
            depth += 1
        elif ch in ")]}>":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            count += 1
    return count


def extract_symbols(file_text: str, path: str, profile: SymbolProfile) -> list[Symbol]:
    """Scan a file line by line against the profile rules."""
    symbols: list[Symbol] = []
    for lineno, raw in enumerate(normalize_text(file_text).split("\n"), start=1):
        line = raw.rstrip()
        if not line:
            continue
        for rule in profile.rules:
            match = rule.pattern.search(line)
            if match is None:
                continue
            arity = None
            if "params" in rule.pattern.groupindex:
                arity = count_top_level_params(match.group("params") or "")
            symbols.append(Symbol(kind=rule.kind, name=match.group("name"), line=lineno, path=path, arity=arity))
    return symbols


# ---------------------------------------------------------------------------
# structural assertions


def _leading_spaces(line: str) -> tuple[int, bool]:
    count = 0
    for ch in line:
        if ch == " ":
            count += 1
        elif ch == "\t":
            return count, True
        else:
            break
    return count, False


def _formatting_violations(name: str, check: Assertion, tree: FileTree) -> list[str]:
    out: list[str] = []
    for path in sorted(tree):
        lines = normalize_text(tree[path]).split("\n")
        if isinstance(check, MaxLineLength):
            for i, line in enumerate(lines, start=1):
                if len(line) > check.limit:
                    out.append(
                        f"{name} at {path}:{i}: line is {len(line)} characters (limit {check.limit})"
                    )
        elif isinstance(check, IndentMultipleOf):
            for i, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                spaces, has_tab = _leading_spaces(line)
                if has_tab:
                    out.append(f"{name} at {path}:{i}: tab character in indentation")
                elif spaces % check.n != 0:
                    out.append(
                        f"{name} at {path}:{i}: indent of {spaces} spaces is not a multiple of {check.n}"
                    )
        elif isinstance(check, MaxBlankLines):
            run = 0
            for i, line in enumerate(lines, start=1):
                if line.strip() == "":
                    run += 1
                    if run == check.limit + 1:
                        out.append(
                            f"{name} at {path}:{i}: more than {check.limit} consecutive blank lines"
                        )
                else:
                    run = 0
    return out


def _declaration_violation(assertion: Assertion, symbols: list[Symbol]) -> str | None:
    if isinstance(assertion, DeclaresFunction):
        for sym in symbols:
            if sym.kind != "function" or sym.name != assertion.name:
                continue
            if assertion.arity is None or sym.arity == assertion.arity:
                return None
        if assertion.arity is None:
            return f"declares_function: function '{assertion.name}' not found"
        return (
            f"declares_function: function '{assertion.name}' with {assertion.arity} "
            f"parameter(s) not found"
        )
    if isinstance(assertion, DeclaresType):
        if any(sym.kind == "type" and sym.name == assertion.name for sym in symbols):
            return None
        return f"declares_type: type '{assertion.name}' not found"
    return None


_ASSERTION_NAMES = {
    MaxLineLength: "max_line_length",
    IndentMultipleOf: "indent_multiple_of",
    MaxBlankLines: "max_blank_lines",
}


def assert_structure(
    spec: StructuralChecker,
    workspace: FileTree,
    style: StyleRules | None,
    profile: SymbolProfile,
) -> CheckResult:
    """Evaluate structural assertions (plus course style rules, when set)
    over the visible files. Feedback lists every failed assertion without
    quoting any code."""
    symbols: list[Symbol] = []
    for path in sorted(workspace):
        symbols.extend(extract_symbols(workspace[path], path, profile))

    violations: list[str] = []
    for assertion in spec.assertions:
        if isinstance(assertion, (DeclaresFunction, DeclaresType)):
            violation = _declaration_violation(assertion, symbols)
            if violation is not None:
                violations.append(violation)
        else:
            violations.extend(_formatting_violations(_ASSERTION_NAMES[type(assertion)], assertion, workspace))

    if style is not None:
        style_checks: list[Assertion] = []
        if style.indent_size is not None:
            style_checks.append(IndentMultipleOf(style.indent_size))
        if style.max_blank_lines is not None:
            style_checks.append(MaxBlankLines(style.max_blank_lines))
        if style.max_line_length is not None:
            style_checks.append(MaxLineLength(style.max_line_length))
        for check in style_checks:
            violations.extend(_formatting_violations(_ASSERTION_NAMES[type(check)], check, workspace))

    if violations:
        return CheckResult(
            CheckStatus.FAILED,
            f"{len(violations)} structural check(s) failed.",
            CheckDetails(violations=tuple(violations)),
        )
    return CheckResult(CheckStatus.SOLVED, "All structural checks passed.")


# ---------------------------------------------------------------------------
# placeholder matching


def check_placeholder_match(
    task_file: TaskFile, learner_file: str, normalize: MatchNormalize
) -> CheckResult:
    """Compare each learner placeholder span against the template answer."""
    try:
        spans = locate_placeholders(learner_file, task_file)
    except UnresolvablePlaceholder as exc:
        return CheckResult(
            CheckStatus.ERROR,
            f"placeholder_unresolvable: {task_file.path} was changed outside placeholder "
            f"{exc.placeholder_index + 1}; reset the task to continue",
        )
    learner = normalize_text(learner_file)
    for span in spans:
        written = learner[span.start : span.end]
        answer = task_file.answer_text(span.placeholder_index)
        if normalize is MatchNormalize.TOKEN_WHITESPACE:
            ok = written.split() == answer.split()
        else:
            ok = written == answer
        if not ok:
            placeholder = task_file.placeholders[span.placeholder_index]
            message = (
                placeholder.hints[0]
                if placeholder.hints
                else f"Placeholder {span.placeholder_index + 1} in {task_file.path} is not solved yet."
            )
            return CheckResult(CheckStatus.FAILED, message)
    return CheckResult(CheckStatus.SOLVED, "All placeholders match.")


# ---------------------------------------------------------------------------
# dispatch


@dataclass
class CheckContext:
    """Course-level inputs a checker may need."""

    run_configs: Sequence[RunConfig] = ()
    style_rules: StyleRules | None = None
    profiles: Mapping[str, SymbolProfile] = field(default_factory=dict)
    case_timeout: float = DEFAULT_CASE_TIMEOUT
    command_timeout: float | None = None


def _exec_dir_tree(task: Task, workspace: FileTree) -> FileTree:
    """Combine learner visible files with the task's hidden files."""
    tree = dict(workspace)
    assert task.code is not None
    for tf in task.code.files:
        if not tf.visible:
            tree[tf.path] = tf.template
    return tree


def _run_in_exec_dir(task: Task, workspace: FileTree, runner) -> CheckResult:
    with tempfile.TemporaryDirectory(prefix="edu-exec-") as tmp:
        tmp_path = Path(tmp)
        for rel, content in _exec_dir_tree(task, workspace).items():
            target = tmp_path / Path(rel)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8", newline="\n")
        return runner(tmp_path)


def check(
    task: Task,
    workspace: FileTree,
    quiz_selection: Iterable[int] | None = None,
    context: CheckContext | None = None,
) -> CheckResult:
    """Check one task against the learner's workspace tree.

    Theory tasks complete by acknowledgment. Infrastructure failures always
    surface as Error results, never as Failed.
    """
    ctx = context or CheckContext()
    if task.quiz is not None:
        if quiz_selection is None:
            raise QuizSelectionError("selection_required", "quiz tasks need a selection")
        return grade_quiz(task.quiz, quiz_selection)
    if task.code is None:
        return CheckResult(CheckStatus.SOLVED, "Theory task completed.")

    checker = task.code.checker
    try:
        if isinstance(checker, PlaceholderMatchChecker):
            for tf in task.code.visible_files():
                if not tf.placeholders:
                    continue
                content = workspace.get(tf.path)
                if content is None:
                    return CheckResult(CheckStatus.ERROR, f"missing_file: {tf.path} not found in workspace")
                result = check_placeholder_match(tf, content, checker.normalize)
                if result.status is not CheckStatus.SOLVED:
                    return result
            return CheckResult(CheckStatus.SOLVED, "All placeholders match.")
        if isinstance(checker, StructuralChecker):
            profile = ctx.profiles.get(checker.profile)
            if profile is None:
                return CheckResult(
                    CheckStatus.ERROR, f"checker_unavailable: profile '{checker.profile}' not loaded"
                )
            visible = {p: workspace[p] for p in task.code.visible_paths() if p in workspace}
            return assert_structure(checker, visible, ctx.style_rules, profile)
        if isinstance(checker, OutputCompareChecker):
            return _run_in_exec_dir(
                task,
                workspace,
                lambda d: run_output_cases(checker, d, ctx.run_configs, ctx.case_timeout),
            )
        if isinstance(checker, CommandChecker):
            return _run_in_exec_dir(
                task,
                workspace,
                lambda d: run_command_checker(checker, d, ctx.command_timeout),
            )
        return CheckResult(CheckStatus.ERROR, f"checker_unavailable: unknown checker {type(checker).__name__}")
    except CheckerError:
        raise
    except Exception as exc:  # infrastructure problems must not look like failures
        return CheckResult(CheckStatus.ERROR, f"checker_error: {exc}")


def reference_workspace(task: Task) -> FileTree:
    """The author's solution tree for a code task (visible files only)."""
    if task.code is None:
        return {}
    return {tf.path: tf.template for tf in task.code.visible_files()}


def placeholder_answers(task: Task) -> list[str]:
    """Every placeholder answer string of a task, for leak auditing."""
    if task.code is None:
        return []
    out = []
    for tf in task.code.files:
        for i in range(len(tf.placeholders)):
            out.append(tf.answer_text(i))
    return out


def materialize_exec_tree(task: Task) -> FileTree:
    """Learner stub tree combined with hidden files, as a checker would see it."""
    return _exec_dir_tree(task, materialize(task, Mode.LEARNER))
