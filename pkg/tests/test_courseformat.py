from __future__ import annotations

import io
import zipfile

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from eduengine.courseformat import (
    CourseValidationError,
    DestNotEmpty,
    MalformedArchive,
    MissingManifest,
    ParseError,
    PathTraversalRejected,
    apply_course_settings,
    load_course,
    pack,
    save_course,
    split_hints,
    unpack,
)
from eduengine.model import (
    CodeSpec,
    Course,
    Lesson,
    LessonKind,
    Placeholder,
    PlaceholderMatchChecker,
    Section,
    StyleRules,
    Task,
    TaskFile,
)

from generators import random_course
import random


def tiny_course(**kwargs) -> Course:
    task = Task(
        id="hello",
        title="Hello",
        description="# Hello\n\nSay hello.\n",
        code=CodeSpec(
            files=(
                TaskFile(
                    path="main.py",
                    template='msg = "hi"\n',
                    placeholders=(Placeholder(offset=6, length=4, stub_text="None"),),
                ),
            ),
            checker=PlaceholderMatchChecker(),
        ),
    )
    theory = Task(id="read", title="Read", description="Theory text.\n")
    defaults = dict(
        id="tiny",
        title="Tiny",
        description="d",
        subject_language="python",
        sections=(
            Section(
                id="s1",
                title="S1",
                lessons=(Lesson(id="l1", title="L1", kind=LessonKind.PLAIN, tasks=(theory, task)),),
            ),
        ),
    )
    defaults.update(kwargs)
    return Course(**defaults)


class TestLoadSave:
    def test_roundtrip_identity(self, tmp_path):
        course = tiny_course()
        save_course(course, tmp_path / "c")
        assert load_course(tmp_path / "c") == course

    def test_demo_course_roundtrip(self, demo_root, demo_course, tmp_path):
        save_course(demo_course, tmp_path / "again")
        # profiles are course-directory data, not part of the Course value
        for p in (demo_root / "profiles").glob("*.yaml"):
            (tmp_path / "again" / "profiles").mkdir(exist_ok=True)
            (tmp_path / "again" / "profiles" / p.name).write_bytes(p.read_bytes())
        assert load_course(tmp_path / "again") == demo_course

    def test_save_is_deterministic(self, tmp_path):
        course = tiny_course()
        save_course(course, tmp_path / "a")
        save_course(course, tmp_path / "b")
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingManifest):
            load_course(tmp_path)

    def test_save_to_unwritable_path_raises_os_error(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("a file, not a directory")
        with pytest.raises(OSError):
            save_course(tiny_course(), blocker / "course")

    def test_yaml_syntax_error_reports_line(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        (root / "course.yaml").write_text("id: x\n  bad indent: [\n")
        with pytest.raises(ParseError) as exc:
            load_course(root)
        assert exc.value.line is not None

    def test_ordering_follows_manifest_not_filesystem(self, tmp_path):
        course = tiny_course()
        root = tmp_path / "c"
        save_course(course, root)
        data = yaml.safe_load((root / "s1" / "l1" / "lesson.yaml").read_text())
        data["tasks"] = list(reversed(data["tasks"]))
        (root / "s1" / "l1" / "lesson.yaml").write_text(yaml.safe_dump(data))
        reloaded = load_course(root)
        assert [t.id for t in reloaded.sections[0].lessons[0].tasks] == ["hello", "read"]

    def test_placeholder_out_of_bounds_fails_load(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        manifest = root / "s1" / "l1" / "hello" / "task.yaml"
        data = yaml.safe_load(manifest.read_text())
        data["code"]["files"][0]["placeholders"][0]["offset"] = 50
        manifest.write_text(yaml.safe_dump(data))
        with pytest.raises(CourseValidationError) as exc:
            load_course(root)
        assert "placeholder_out_of_bounds" in [v.code for v in exc.value.violations]

    def test_stray_file_rejected(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        (root / "s1" / "l1" / "hello" / "rogue.txt").write_text("boo")
        with pytest.raises(CourseValidationError) as exc:
            load_course(root)
        assert "stray_file" in [v.code for v in exc.value.violations]

    def test_missing_declared_file(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        (root / "s1" / "l1" / "hello" / "main.py").unlink()
        with pytest.raises(ParseError):
            load_course(root)

    def test_future_format_version_rejected(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        data = yaml.safe_load((root / "course.yaml").read_text())
        data["format_version"] = 99
        (root / "course.yaml").write_text(yaml.safe_dump(data))
        with pytest.raises(ParseError):
            load_course(root)

    def test_crlf_normalized_on_load(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        target = root / "s1" / "l1" / "hello" / "main.py"
        target.write_bytes(b'msg = "hi"\r\n')
        course = load_course(root)
        template = course.sections[0].lessons[0].tasks[1].code.files[0].template
        assert "\r" not in template

    def test_unknown_structural_profile(self, tmp_path):
        course = tiny_course()
        from eduengine.model import DeclaresFunction, StructuralChecker

        task = course.sections[0].lessons[0].tasks[1]
        bad = Task(
            id=task.id,
            title=task.title,
            description=task.description,
            code=CodeSpec(
                files=task.code.files,
                checker=StructuralChecker(assertions=(DeclaresFunction("f"),), profile="nope"),
            ),
        )
        lesson = Lesson(id="l1", title="L1", kind=LessonKind.PLAIN, tasks=(course.sections[0].lessons[0].tasks[0], bad))
        course = tiny_course(sections=(Section(id="s1", title="S1", lessons=(lesson,)),))
        root = tmp_path / "c"
        save_course(course, root)
        with pytest.raises(CourseValidationError) as exc:
            load_course(root)
        assert "unknown_profile" in [v.code for v in exc.value.violations]


class TestPackUnpack:
    def test_pack_deterministic(self, demo_root):
        assert pack(demo_root) == pack(demo_root)

    def test_pack_entries_sorted_and_epoch(self, demo_root):
        archive = pack(demo_root)
        with zipfile.ZipFile(io.BytesIO(archive)) as zf:
            names = zf.namelist()
            assert names == sorted(names)
            assert all(info.date_time == (1980, 1, 1, 0, 0, 0) for info in zf.infolist())
            assert "manifest" in names

    def test_unpack_roundtrip(self, demo_root, demo_course, tmp_path):
        dest = unpack(pack(demo_root), tmp_path / "out")
        assert load_course(dest) == demo_course

    def test_pack_unpack_pack_fixed_point(self, demo_root, tmp_path):
        first = pack(demo_root)
        unpack(first, tmp_path / "out")
        assert pack(tmp_path / "out") == first

    def test_pack_ignores_listing_order(self, tmp_path):
        # identical content created in different orders packs identically
        course = tiny_course()
        save_course(course, tmp_path / "a")
        save_course(course, tmp_path / "b")
        assert pack(tmp_path / "a") == pack(tmp_path / "b")

    def test_pack_of_invalid_course_reports_violations(self, tmp_path):
        root = tmp_path / "c"
        save_course(tiny_course(), root)
        (root / "s1" / "l1" / "hello" / "rogue.txt").write_text("boo")
        with pytest.raises(CourseValidationError):
            pack(root)

    def test_unpack_rejects_traversal(self, tmp_path):
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w") as zf:
            zf.writestr("../evil", b"x")
        with pytest.raises(PathTraversalRejected):
            unpack(buffer.getvalue(), tmp_path / "out")

    def test_unpack_rejects_absolute(self, tmp_path):
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w") as zf:
            zf.writestr("/etc/passwd", b"x")
        with pytest.raises(PathTraversalRejected):
            unpack(buffer.getvalue(), tmp_path / "out")

    @given(name=st.text(min_size=1, max_size=30))
    @settings(max_examples=60, deadline=None)
    def test_unpack_never_escapes_dest(self, name, tmp_path_factory):
        buffer = io.BytesIO()
        try:
            with zipfile.ZipFile(buffer, "w") as zf:
                zf.writestr(name, b"x")
        except Exception:
            return  # zipfile itself refused to build the hostile archive
        dest = tmp_path_factory.mktemp("escape") / "out"
        try:
            unpack(buffer.getvalue(), dest)
        except (PathTraversalRejected, MalformedArchive):
            return
        for p in dest.rglob("*"):
            assert dest in p.resolve().parents or p.resolve() == dest.resolve()

    def test_truncated_zip(self, tmp_path, demo_root):
        archive = pack(demo_root)
        with pytest.raises(MalformedArchive):
            unpack(archive[: len(archive) // 2], tmp_path / "out")

    def test_dest_not_empty(self, tmp_path, demo_root):
        dest = tmp_path / "out"
        dest.mkdir()
        (dest / "something.txt").write_text("x")
        with pytest.raises(DestNotEmpty):
            unpack(pack(demo_root), dest)

    def test_no_cr_in_loaded_content(self, demo_course):
        for section in demo_course.sections:
            for lesson in section.lessons:
                for task in lesson.tasks:
                    assert "\r" not in task.description
                    if task.code:
                        for tf in task.code.files:
                            assert "\r" not in tf.template


class TestRandomizedRoundtrip:
    def test_random_courses_roundtrip(self, tmp_path):
        rng = random.Random(20240811)
        for i in range(25):
            course = random_course(rng)
            root = tmp_path / f"c{i}"
            save_course(course, root)
            (root / "profiles").mkdir(exist_ok=True)
            (root / "profiles" / "pyline.yaml").write_text(
                "rules:\n  - kind: function\n    pattern: 'def (?P<name>\\w+)\\((?P<params>[^)]*)\\)'\n"
            )
            assert load_course(root) == course


class TestSettings:
    def test_style_rules_written(self, tmp_path):
        course = tiny_course(style_rules=StyleRules(indent_size=4))
        target = apply_course_settings(course, tmp_path / "sess")
        data = yaml.safe_load(target.read_text())
        assert data["style_rules"]["indent_size"] == 4

    def test_no_style_rules_empty_section(self, tmp_path):
        target = apply_course_settings(tiny_course(), tmp_path / "sess")
        data = yaml.safe_load(target.read_text())
        assert data["style_rules"] == {}

    def test_idempotent_bytes(self, tmp_path):
        course = tiny_course(style_rules=StyleRules(indent_size=2, max_line_length=80))
        first = apply_course_settings(course, tmp_path / "sess").read_bytes()
        second = apply_course_settings(course, tmp_path / "sess").read_bytes()
        assert first == second


class TestHintBlocks:
    def test_split(self):
        md = "Intro\n\n```hint\nTry a loop.\n```\n\nMore text.\n\n```hint\nSecond hint.\n```\n"
        body, hints = split_hints(md)
        assert hints == ["Try a loop.", "Second hint."]
        assert "Try a loop" not in body
        assert "More text." in body

    def test_regular_fences_untouched(self):
        md = "```python\nx = 1\n```\n"
        body, hints = split_hints(md)
        assert hints == []
        assert body == md
