"""On-disk course format.

A course is a directory tree: ``course.yaml`` at the root, one directory per
section with ``section.yaml``, lesson directories with ``lesson.yaml``, and
task directories holding ``task.yaml``, the ``task.md`` description, and the
task's files at their declared relative paths. Symbol profiles live under
``profiles/<key>.yaml``.

Distribution archives are plain zip files made reproducible: entries sorted
by path, timestamps fixed to the zip epoch, fixed permissions, plus a
synthetic top-level ``manifest`` entry carrying the course id and format
version.
"""

from __future__ import annotations

import io
import json
import os
import re
import zipfile
from pathlib import Path
from typing import Any, Mapping

import yaml

from .model import (
    CURRENT_FORMAT_VERSION,
    Assertion,
    CheckerSpec,
    CodeSpec,
    CommandChecker,
    Course,
    DeclaresFunction,
    DeclaresType,
    IndentMultipleOf,
    IoCase,
    Lesson,
    LessonKind,
    MatchNormalize,
    MaxBlankLines,
    MaxLineLength,
    OutputCompareChecker,
    Placeholder,
    PlaceholderMatchChecker,
    QuizMode,
    QuizOption,
    QuizSpec,
    RunConfig,
    Section,
    StructuralChecker,
    StyleRules,
    Task,
    TaskFile,
    Violation,
    is_safe_relative_path,
    normalize_text,
    validate_course,
)

COURSE_MANIFEST = "course.yaml"
SECTION_MANIFEST = "section.yaml"
LESSON_MANIFEST = "lesson.yaml"
TASK_MANIFEST = "task.yaml"
TASK_DESCRIPTION = "task.md"
PROFILE_DIR = "profiles"
ARCHIVE_MANIFEST = "manifest"
SETTINGS_FILE = "settings.yaml"

# Zip epoch; zipfile cannot represent anything earlier.
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class CourseFormatError(Exception):
    pass


class MissingManifest(CourseFormatError):
    def __init__(self, path: Path) -> None:
        self.path = path
        super().__init__(f"missing manifest: {path}")


class ParseError(CourseFormatError):
    def __init__(self, path: Path | str, message: str, line: int | None = None) -> None:
        self.path = Path(path)
        self.line = line
        self.message = message
        loc = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{loc}: {message}")


class CourseValidationError(CourseFormatError):
    def __init__(self, violations: list[Violation]) -> None:
        self.violations = violations
        lines = "; ".join(f"{v.code} at {v.path or '<course>'}" for v in violations[:8])
        more = "" if len(violations) <= 8 else f" (+{len(violations) - 8} more)"
        super().__init__(f"course failed validation: {lines}{more}")


class MalformedArchive(CourseFormatError):
    pass


class PathTraversalRejected(CourseFormatError):
    pass


class DestNotEmpty(CourseFormatError):
    pass


# libyaml bindings when present; the pure-Python fallback behaves identically
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)
_YAML_DUMPER = getattr(yaml, "CSafeDumper", yaml.SafeDumper)


def _load_yaml(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise MissingManifest(path)
    try:
        data = yaml.load(path.read_text(encoding="utf-8"), Loader=_YAML_LOADER)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(path, str(exc).replace("\n", " "), None if mark is None else mark.line + 1)
    except UnicodeDecodeError as exc:
        raise ParseError(path, f"not valid UTF-8: {exc}")
    if not isinstance(data, dict):
        raise ParseError(path, "manifest must be a mapping")
    return data


def _req(data: Mapping[str, Any], key: str, kind: type, path: Path) -> Any:
    if key not in data:
        raise ParseError(path, f"missing required key '{key}'")
    value = data[key]
    if not isinstance(value, kind):
        raise ParseError(path, f"key '{key}' must be of type {kind.__name__}")
    return value


def _opt_str(data: Mapping[str, Any], key: str, path: Path) -> str | None:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ParseError(path, f"key '{key}' must be a string")
    return value


def _str_list(value: Any, key: str, path: Path) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ParseError(path, f"key '{key}' must be a list of strings")
    return value


def _dump_yaml(data: Mapping[str, Any]) -> str:
    return yaml.dump(
        data, Dumper=_YAML_DUMPER, sort_keys=True, allow_unicode=True, default_flow_style=False
    )


def _read_text_file(path: Path) -> str:
    try:
        raw = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(path, f"not valid UTF-8: {exc}")
    return normalize_text(raw)


# ---------------------------------------------------------------------------
# checker / assertion serialization


def _checker_to_dict(checker: CheckerSpec) -> dict[str, Any]:
    if isinstance(checker, OutputCompareChecker):
        return {
            "type": "output_compare",
            "run": checker.run,
            "cases": [{"stdin": c.stdin, "expected_stdout": c.expected_stdout} for c in checker.cases],
        }
    if isinstance(checker, CommandChecker):
        return {
            "type": "command",
            "command": list(checker.command),
            "timeout_seconds": checker.timeout_seconds,
        }
    if isinstance(checker, StructuralChecker):
        return {
            "type": "structural",
            "profile": checker.profile,
            "assertions": [_assertion_to_dict(a) for a in checker.assertions],
        }
    if isinstance(checker, PlaceholderMatchChecker):
        return {"type": "placeholder_match", "normalize": checker.normalize.value}
    raise TypeError(f"unknown checker type: {checker!r}")


def _assertion_to_dict(a: Assertion) -> dict[str, Any]:
    if isinstance(a, DeclaresFunction):
        out: dict[str, Any] = {"type": "declares_function", "name": a.name}
        if a.arity is not None:
            out["arity"] = a.arity
        return out
    if isinstance(a, DeclaresType):
        return {"type": "declares_type", "name": a.name}
    if isinstance(a, MaxLineLength):
        return {"type": "max_line_length", "limit": a.limit}
    if isinstance(a, IndentMultipleOf):
        return {"type": "indent_multiple_of", "n": a.n}
    if isinstance(a, MaxBlankLines):
        return {"type": "max_blank_lines", "limit": a.limit}
    raise TypeError(f"unknown assertion type: {a!r}")


def _assertion_from_dict(data: Mapping[str, Any], path: Path) -> Assertion:
    kind = _req(data, "type", str, path)
    if kind == "declares_function":
        arity = data.get("arity")
        if arity is not None and not isinstance(arity, int):
            raise ParseError(path, "assertion 'arity' must be an integer")
        return DeclaresFunction(name=_req(data, "name", str, path), arity=arity)
    if kind == "declares_type":
        return DeclaresType(name=_req(data, "name", str, path))
    if kind == "max_line_length":
        return MaxLineLength(limit=_req(data, "limit", int, path))
    if kind == "indent_multiple_of":
        return IndentMultipleOf(n=_req(data, "n", int, path))
    if kind == "max_blank_lines":
        return MaxBlankLines(limit=_req(data, "limit", int, path))
    raise ParseError(path, f"unknown assertion type '{kind}'")


def _checker_from_dict(data: Mapping[str, Any], path: Path) -> CheckerSpec:
    kind = _req(data, "type", str, path)
    if kind == "output_compare":
        raw_cases = _req(data, "cases", list, path)
        cases = []
        for c in raw_cases:
            if not isinstance(c, dict):
                raise ParseError(path, "each output case must be a mapping")
            cases.append(
                IoCase(
                    stdin=str(c.get("stdin", "")),
                    expected_stdout=str(c.get("expected_stdout", "")),
                )
            )
        return OutputCompareChecker(run=_req(data, "run", str, path), cases=tuple(cases))
    if kind == "command":
        command = tuple(_str_list(_req(data, "command", list, path), "command", path))
        timeout = data.get("timeout_seconds", 60)
        if not isinstance(timeout, int):
            raise ParseError(path, "'timeout_seconds' must be an integer")
        return CommandChecker(command=command, timeout_seconds=timeout)
    if kind == "structural":
        raw = _req(data, "assertions", list, path)
        assertions = tuple(
            _assertion_from_dict(a, path) if isinstance(a, dict) else _bad_assertion(path) for a in raw
        )
        return StructuralChecker(assertions=assertions, profile=_req(data, "profile", str, path))
    if kind == "placeholder_match":
        normalize = data.get("normalize", "exact")
        try:
            return PlaceholderMatchChecker(normalize=MatchNormalize(normalize))
        except ValueError:
            raise ParseError(path, f"unknown normalize mode '{normalize}'")
    raise ParseError(path, f"unknown checker type '{kind}'")


def _bad_assertion(path: Path) -> Assertion:
    raise ParseError(path, "each assertion must be a mapping")


# ---------------------------------------------------------------------------
# loading


def _load_task(task_dir: Path) -> Task:
    manifest_path = task_dir / TASK_MANIFEST
    data = _load_yaml(manifest_path)
    task_id = _req(data, "id", str, manifest_path)
    title = _req(data, "title", str, manifest_path)
    kind = _req(data, "kind", str, manifest_path)

    desc_path = task_dir / TASK_DESCRIPTION
    try:
        description = _read_text_file(desc_path)
    except FileNotFoundError:
        raise MissingManifest(desc_path)

    quiz = None
    code = None
    if kind == "quiz":
        qdata = _req(data, "quiz", dict, manifest_path)
        mode_raw = _req(qdata, "mode", str, manifest_path)
        try:
            mode = QuizMode(mode_raw)
        except ValueError:
            raise ParseError(manifest_path, f"unknown quiz mode '{mode_raw}'")
        options = []
        for opt in _req(qdata, "options", list, manifest_path):
            if not isinstance(opt, dict):
                raise ParseError(manifest_path, "each quiz option must be a mapping")
            options.append(
                QuizOption(
                    text=str(opt.get("text", "")),
                    correct=bool(opt.get("correct", False)),
                    feedback=opt.get("feedback"),
                )
            )
        quiz = QuizSpec(
            mode=mode,
            options=tuple(options),
            correct_feedback=_opt_str(qdata, "correct_feedback", manifest_path),
        )
    elif kind == "code":
        cdata = _req(data, "code", dict, manifest_path)
        files = []
        for fdata in _req(cdata, "files", list, manifest_path):
            if not isinstance(fdata, dict):
                raise ParseError(manifest_path, "each file entry must be a mapping")
            rel = _req(fdata, "path", str, manifest_path)
            if not is_safe_relative_path(rel):
                raise ParseError(manifest_path, f"unsafe file path '{rel}'")
            file_path = task_dir / Path(rel)
            placeholders = []
            for pdata in fdata.get("placeholders", []) or []:
                if not isinstance(pdata, dict):
                    raise ParseError(manifest_path, "each placeholder must be a mapping")
                placeholders.append(
                    Placeholder(
                        offset=_req(pdata, "offset", int, manifest_path),
                        length=_req(pdata, "length", int, manifest_path),
                        stub_text=_req(pdata, "stub_text", str, manifest_path),
                        hints=tuple(_str_list(pdata.get("hints", []), "hints", manifest_path)),
                    )
                )
            try:
                template = _read_text_file(file_path)
            except FileNotFoundError:
                raise ParseError(manifest_path, f"declared file '{rel}' does not exist")
            files.append(
                TaskFile(
                    path=rel,
                    template=template,
                    visible=bool(fdata.get("visible", True)),
                    placeholders=tuple(placeholders),
                )
            )
        checker = _checker_from_dict(_req(cdata, "checker", dict, manifest_path), manifest_path)
        code = CodeSpec(files=tuple(files), checker=checker)
    elif kind != "theory":
        raise ParseError(manifest_path, f"unknown task kind '{kind}'")

    if task_id != task_dir.name:
        raise ParseError(manifest_path, f"task id '{task_id}' does not match directory '{task_dir.name}'")
    return Task(id=task_id, title=title, description=description, quiz=quiz, code=code)


def _load_lesson(lesson_dir: Path) -> Lesson:
    manifest_path = lesson_dir / LESSON_MANIFEST
    data = _load_yaml(manifest_path)
    lesson_id = _req(data, "id", str, manifest_path)
    if lesson_id != lesson_dir.name:
        raise ParseError(manifest_path, f"lesson id '{lesson_id}' does not match directory '{lesson_dir.name}'")
    kind_raw = data.get("kind", "plain")
    try:
        kind = LessonKind(kind_raw)
    except ValueError:
        raise ParseError(manifest_path, f"unknown lesson kind '{kind_raw}'")
    tasks = tuple(
        _load_task(lesson_dir / name)
        for name in _str_list(_req(data, "tasks", list, manifest_path), "tasks", manifest_path)
    )
    return Lesson(id=lesson_id, title=_req(data, "title", str, manifest_path), kind=kind, tasks=tasks)


def _load_section(section_dir: Path) -> Section:
    manifest_path = section_dir / SECTION_MANIFEST
    data = _load_yaml(manifest_path)
    section_id = _req(data, "id", str, manifest_path)
    if section_id != section_dir.name:
        raise ParseError(
            manifest_path, f"section id '{section_id}' does not match directory '{section_dir.name}'"
        )
    lessons = tuple(
        _load_lesson(section_dir / name)
        for name in _str_list(_req(data, "lessons", list, manifest_path), "lessons", manifest_path)
    )
    return Section(id=section_id, title=_req(data, "title", str, manifest_path), lessons=lessons)


def _walk_files(root: Path) -> list[str]:
    """Relative POSIX paths of all regular files under root (scandir-based)."""
    out: list[str] = []
    base = str(root)
    for dirpath, _dirnames, filenames in os.walk(base):
        rel_dir = os.path.relpath(dirpath, base)
        for name in filenames:
            rel = name if rel_dir == "." else f"{rel_dir}/{name}"
            out.append(rel.replace(os.sep, "/"))
    return sorted(out)


def _stray_file_violations(course: Course, root: Path) -> list[Violation]:
    out: list[Violation] = []
    for section in course.sections:
        for lesson in section.lessons:
            for task in lesson.tasks:
                task_dir = root / section.id / lesson.id / task.id
                declared = {TASK_MANIFEST, TASK_DESCRIPTION}
                if task.code is not None:
                    declared.update(tf.path for tf in task.code.files)
                for rel in _walk_files(task_dir):
                    if rel not in declared:
                        out.append(
                            Violation(
                                "stray_file",
                                f"{section.id}/{lesson.id}/{task.id}#{rel}",
                                f"file '{rel}' is not referenced by the task manifest",
                            )
                        )
    return out


def _profile_violations(course: Course, root: Path) -> list[Violation]:
    from .checkers import load_profile

    out: list[Violation] = []
    needed: dict[str, str] = {}
    for section in course.sections:
        for lesson in section.lessons:
            for task in lesson.tasks:
                if task.code is not None and isinstance(task.code.checker, StructuralChecker):
                    needed.setdefault(task.code.checker.profile, f"{section.id}/{lesson.id}/{task.id}")
    for key, where in sorted(needed.items()):
        profile_path = root / PROFILE_DIR / f"{key}.yaml"
        if not profile_path.is_file():
            out.append(Violation("unknown_profile", where, f"profile '{key}' not found under {PROFILE_DIR}/"))
            continue
        try:
            load_profile(profile_path)
        except CourseFormatError as exc:
            out.append(Violation("invalid_profile", where, f"profile '{key}' is invalid: {exc}"))
    return out


def load_course(root: Path | str) -> Course:
    """Load and validate a course directory.

    Section/lesson/task ordering follows the manifests' order lists, not the
    filesystem. Any invariant violation fails the load.
    """
    root = Path(root)
    manifest_path = root / COURSE_MANIFEST
    data = _load_yaml(manifest_path)
    version = _req(data, "format_version", int, manifest_path)
    if version > CURRENT_FORMAT_VERSION:
        raise ParseError(
            manifest_path,
            f"course format version {version} is newer than supported {CURRENT_FORMAT_VERSION}",
        )

    style = None
    if data.get("style_rules") is not None:
        sdata = _req(data, "style_rules", dict, manifest_path)
        style = StyleRules(
            indent_size=sdata.get("indent_size"),
            max_blank_lines=sdata.get("max_blank_lines"),
            max_line_length=sdata.get("max_line_length"),
        )
    run_configs = []
    for rdata in data.get("run_configs", []) or []:
        if not isinstance(rdata, dict):
            raise ParseError(manifest_path, "each run config must be a mapping")
        env = rdata.get("env", {}) or {}
        if not isinstance(env, dict):
            raise ParseError(manifest_path, "run config 'env' must be a mapping")
        run_configs.append(
            RunConfig(
                name=_req(rdata, "name", str, manifest_path),
                command=tuple(_str_list(_req(rdata, "command", list, manifest_path), "command", manifest_path)),
                working_dir=_opt_str(rdata, "working_dir", manifest_path),
                env={str(k): str(v) for k, v in env.items()},
            )
        )

    sections = tuple(
        _load_section(root / name)
        for name in _str_list(_req(data, "sections", list, manifest_path), "sections", manifest_path)
    )
    course = Course(
        id=_req(data, "id", str, manifest_path),
        title=_req(data, "title", str, manifest_path),
        description=str(data.get("description", "")),
        subject_language=_req(data, "subject_language", str, manifest_path),
        sections=sections,
        style_rules=style,
        run_configs=tuple(run_configs),
        format_version=version,
    )

    violations = validate_course(course)
    violations.extend(_stray_file_violations(course, root))
    violations.extend(_profile_violations(course, root))
    if violations:
        raise CourseValidationError(violations)
    return course


# ---------------------------------------------------------------------------
# saving


def save_course(course: Course, root: Path | str) -> None:
    """Write the course directory; serialization is deterministic, so saving
    the same course twice produces identical bytes."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    course_data: dict[str, Any] = {
        "format_version": course.format_version,
        "id": course.id,
        "title": course.title,
        "description": course.description,
        "subject_language": course.subject_language,
        "sections": [s.id for s in course.sections],
        "run_configs": [_run_config_to_dict(rc) for rc in course.run_configs],
    }
    if course.style_rules is not None:
        course_data["style_rules"] = _style_to_dict(course.style_rules)
    (root / COURSE_MANIFEST).write_text(_dump_yaml(course_data), encoding="utf-8")

    for section in course.sections:
        section_dir = root / section.id
        section_dir.mkdir(parents=True, exist_ok=True)
        (section_dir / SECTION_MANIFEST).write_text(
            _dump_yaml({"id": section.id, "title": section.title, "lessons": [l.id for l in section.lessons]}),
            encoding="utf-8",
        )
        for lesson in section.lessons:
            lesson_dir = section_dir / lesson.id
            lesson_dir.mkdir(parents=True, exist_ok=True)
            (lesson_dir / LESSON_MANIFEST).write_text(
                _dump_yaml(
                    {
                        "id": lesson.id,
                        "title": lesson.title,
                        "kind": lesson.kind.value,
                        "tasks": [t.id for t in lesson.tasks],
                    }
                ),
                encoding="utf-8",
            )
            for task in lesson.tasks:
                _save_task(task, lesson_dir / task.id)


def _style_to_dict(style: StyleRules) -> dict[str, int]:
    out = {}
    if style.indent_size is not None:
        out["indent_size"] = style.indent_size
    if style.max_blank_lines is not None:
        out["max_blank_lines"] = style.max_blank_lines
    if style.max_line_length is not None:
        out["max_line_length"] = style.max_line_length
    return out


def _run_config_to_dict(rc: RunConfig) -> dict[str, Any]:
    out: dict[str, Any] = {"name": rc.name, "command": list(rc.command)}
    if rc.working_dir is not None:
        out["working_dir"] = rc.working_dir
    if rc.env:
        out["env"] = dict(rc.env)
    return out


def _save_task(task: Task, task_dir: Path) -> None:
    task_dir.mkdir(parents=True, exist_ok=True)
    data: dict[str, Any] = {"id": task.id, "title": task.title, "kind": task.kind}
    if task.quiz is not None:
        options = []
        for opt in task.quiz.options:
            odata: dict[str, Any] = {"text": opt.text, "correct": opt.correct}
            if opt.feedback is not None:
                odata["feedback"] = opt.feedback
            options.append(odata)
        qdata: dict[str, Any] = {"mode": task.quiz.mode.value, "options": options}
        if task.quiz.correct_feedback is not None:
            qdata["correct_feedback"] = task.quiz.correct_feedback
        data["quiz"] = qdata
    if task.code is not None:
        files = []
        for tf in task.code.files:
            fdata: dict[str, Any] = {"path": tf.path, "visible": tf.visible}
            if tf.placeholders:
                fdata["placeholders"] = [
                    {
                        "offset": p.offset,
                        "length": p.length,
                        "stub_text": p.stub_text,
                        "hints": list(p.hints),
                    }
                    for p in tf.placeholders
                ]
            files.append(fdata)
            file_path = task_dir / Path(tf.path)
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(tf.template, encoding="utf-8", newline="\n")
        data["code"] = {"files": files, "checker": _checker_to_dict(task.code.checker)}
    (task_dir / TASK_MANIFEST).write_text(_dump_yaml(data), encoding="utf-8")
    (task_dir / TASK_DESCRIPTION).write_text(task.description, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# archives


def _archive_entries(root: Path) -> list[tuple[str, Path]]:
    entries = []
    base = str(root)
    for dirpath, dirnames, filenames in os.walk(base):
        # editor/VCS droppings never belong in a distribution
        dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        rel_dir = os.path.relpath(dirpath, base)
        for name in filenames:
            if name.startswith("."):
                continue
            rel = name if rel_dir == "." else f"{rel_dir}/{name}".replace(os.sep, "/")
            entries.append((rel, Path(dirpath) / name))
    entries.sort(key=lambda item: item[0])
    return entries


def pack(root: Path | str) -> bytes:
    """Produce the deterministic distribution archive for a course directory."""
    root = Path(root)
    course = load_course(root)
    buffer = io.BytesIO()
    manifest = json.dumps(
        {"course_id": course.id, "format_version": course.format_version}, sort_keys=True
    ).encode("utf-8")

    items: list[tuple[str, bytes]] = [(ARCHIVE_MANIFEST, manifest)]
    items.extend((rel, path.read_bytes()) for rel, path in _archive_entries(root))
    items.sort(key=lambda item: item[0])

    with zipfile.ZipFile(buffer, "w") as zf:
        for rel, payload in items:
            info = zipfile.ZipInfo(rel, date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            info.create_system = 3
            zf.writestr(info, payload, compress_type=zipfile.ZIP_DEFLATED, compresslevel=6)
    return buffer.getvalue()


def pack_to_file(root: Path | str, out: Path | str) -> Path:
    out = Path(out)
    out.write_bytes(pack(root))
    return out


def unpack(archive: bytes, dest: Path | str) -> Path:
    """Extract a course archive into an empty (or absent) directory.

    Entry names are screened against path traversal; the synthetic
    ``manifest`` entry is archive metadata and is not written to disk.
    """
    dest = Path(dest)
    if dest.exists():
        if not dest.is_dir():
            raise DestNotEmpty(f"{dest} exists and is not a directory")
        if any(dest.iterdir()):
            raise DestNotEmpty(f"{dest} is not empty")
    try:
        zf = zipfile.ZipFile(io.BytesIO(archive))
    except zipfile.BadZipFile as exc:
        raise MalformedArchive(f"not a valid archive: {exc}")

    with zf:
        names = zf.namelist()
        if ARCHIVE_MANIFEST in names:
            try:
                meta = json.loads(zf.read(ARCHIVE_MANIFEST).decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                raise MalformedArchive(f"unreadable archive manifest: {exc}")
            version = meta.get("format_version")
            if isinstance(version, int) and version > CURRENT_FORMAT_VERSION:
                raise MalformedArchive(
                    f"archive format version {version} is newer than supported {CURRENT_FORMAT_VERSION}"
                )
        dest.mkdir(parents=True, exist_ok=True)
        for name in names:
            if name == ARCHIVE_MANIFEST:
                continue
            if name.endswith("/"):
                continue
            if not is_safe_relative_path(name):
                raise PathTraversalRejected(f"archive entry '{name}' escapes the destination")
            target = dest / Path(name)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(zf.read(name))
    return dest


# ---------------------------------------------------------------------------
# session settings


def apply_course_settings(course: Course, session_dir: Path | str) -> Path:
    """Write the course's style rules and run configurations into the session
    root so checkers and the UI read one canonical location. Idempotent."""
    session_dir = Path(session_dir)
    session_dir.mkdir(parents=True, exist_ok=True)
    data = {
        "style_rules": _style_to_dict(course.style_rules) if course.style_rules is not None else {},
        "run_configs": [_run_config_to_dict(rc) for rc in course.run_configs],
    }
    target = session_dir / SETTINGS_FILE
    target.write_text(_dump_yaml(data), encoding="utf-8")
    return target


# ---------------------------------------------------------------------------
# task.md hint blocks

_HINT_BLOCK_RE = re.compile(r"^```hint[ \t]*\n(.*?)^```[ \t]*$\n?", re.MULTILINE | re.DOTALL)


def split_hints(markdown: str) -> tuple[str, list[str]]:
    """Separate ```hint fenced blocks from a task description.

    Returns the description without the hint blocks plus the hint texts in
    order, so the UI can render them as collapsible elements.
    """
    hints = [m.group(1).strip() for m in _HINT_BLOCK_RE.finditer(markdown)]
    stripped = _HINT_BLOCK_RE.sub("", markdown)
    return stripped, hints
