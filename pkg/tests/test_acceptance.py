"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured runtime. Tolerances are exact (byte/value equality) throughout.
"""

from __future__ import annotations

import itertools
import random
import shutil
import sys
import time
from pathlib import Path

import httpx

from eduengine.checkers import (
    CheckContext,
    check,
    grade_quiz,
    load_profiles,
    placeholder_answers,
    run_command_checker,
)
from eduengine.courseformat import load_course, pack, save_course, unpack
from eduengine.model import (
    CheckStatus,
    CommandChecker,
    QuizMode,
    QuizOption,
    QuizSpec,
    TaskStatus,
    find_task,
    iter_tasks,
    status_color,
)
from eduengine.progress import load_store, replay_statuses
from eduengine.session import Session
from eduengine.api import create_app
from eduengine.workspace import Mode, locate_placeholders, materialize, materialize_file, propagate

from conftest import run_server
from generators import placeholder_instance, random_course
from oracles import diff3_text, random_edit, random_file

PY = sys.executable


def report(name: str, started: float, budget: float) -> None:
    elapsed = time.monotonic() - started
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{name} exceeded its {budget}s runtime budget"


class TestFormatRoundtripSuite:
    def test_format_roundtrip_suite(self, tmp_path, demo_root, demo_course):
        # the criterion bounds wall-clock time, so scratch work goes to the
        # fastest available tmpfs
        import tempfile

        shm = Path("/dev/shm")
        scratch_base = tempfile.mkdtemp(dir=shm if shm.is_dir() else tmp_path)
        started = time.monotonic()
        profile_src = demo_root / "profiles" / "pyline.yaml"

        def dir_bytes(root: Path) -> dict[str, bytes]:
            return {
                p.relative_to(root).as_posix(): p.read_bytes()
                for p in root.rglob("*")
                if p.is_file()
            }

        def exercise(course, root: Path, with_profiles: bool):
            save_course(course, root)
            if with_profiles:
                (root / "profiles").mkdir(exist_ok=True)
                shutil.copy(profile_src, root / "profiles" / "pyline.yaml")
            assert load_course(root) == course, "load(save(course)) must equal the course"
            first = pack(root)
            assert pack(root) == first, "pack must be byte-deterministic across runs"
            dest = root.parent / (root.name + "-unpacked")
            unpack(first, dest)
            assert dir_bytes(dest) == dir_bytes(root), "unpack(pack(dir)) must restore the directory"
            shutil.rmtree(root)
            shutil.rmtree(dest)

        # the shipped demo course first: as a directory copy and as a value
        demo_again = tmp_path / "demo-copy"
        shutil.copytree(demo_root, demo_again)
        original = pack(demo_again)
        assert pack(demo_again) == original
        dest = tmp_path / "demo-unpacked"
        unpack(original, dest)
        assert load_course(dest) == demo_course
        assert pack(dest) == original
        exercise(demo_course, tmp_path / "demo-resaved", with_profiles=True)

        rng = random.Random(0xED0C0DE)
        try:
            for i in range(200):
                exercise(random_course(rng), Path(scratch_base) / f"course-{i}", with_profiles=True)
        finally:
            shutil.rmtree(scratch_base, ignore_errors=True)
        report("format-roundtrip", started, 30.0)


class TestPlaceholderAlgebra:
    def test_placeholder_algebra(self):
        started = time.monotonic()
        rng = random.Random(0x9A9A)
        for i in range(500):
            file = placeholder_instance(rng)
            learner, spans = materialize_file(file)

            rebuilt = learner
            for index in reversed(range(len(spans))):
                start, end = spans[index]
                rebuilt = rebuilt[:start] + file.answer_text(index) + rebuilt[end:]
            assert rebuilt == file.template, f"instance {i}: re-substitution must rebuild the template"

            if file.placeholders:
                located = locate_placeholders(learner, file)
                assert [(s.start, s.end) for s in located] == spans, (
                    f"instance {i}: locate on the unedited materialization must return stub spans"
                )
        report("placeholder-algebra", started, 10.0)


class TestPropagationVsOracle:
    def test_propagation_vs_oracle(self):
        from eduengine.model import CodeSpec, Lesson, LessonKind, PlaceholderMatchChecker, Task, TaskFile

        started = time.monotonic()
        rng = random.Random(0xD1FF3)
        clean = conflicted = 0
        produced = 0
        case = 0
        while produced < 200:
            case += 1
            # base capped so even fully-inserted variants stay within 40 lines
            base = random_file(rng, max_lines=31)
            theirs = random_edit(rng, base, max_ops=3, max_span=3, salt=case * 2)
            ours = random_edit(rng, base, max_ops=2, max_span=3, salt=case * 2 + 1)
            assert max(len(base), len(theirs), len(ours)) <= 40
            changed = sum(x != y for x, y in zip(ours, base)) + abs(len(ours) - len(base))
            if changed > 6:
                continue
            produced += 1
            a_text, b_text, l_text = "".join(base), "".join(theirs), "".join(ours)
            tasks = tuple(
                Task(
                    id=f"t{i}",
                    title="t",
                    description="d",
                    code=CodeSpec(
                        files=(TaskFile(path="main.txt", template=tpl),),
                        checker=PlaceholderMatchChecker(),
                    ),
                )
                for i, tpl in enumerate((a_text, b_text))
            )
            lesson = Lesson(id="fw", title="f", kind=LessonKind.FRAMEWORK, tasks=tasks)
            result = propagate(lesson, 0, 1, {"main.txt": l_text})
            oracle_merged, oracle_conflicts = diff3_text(l_text, a_text, b_text)
            if oracle_conflicts == 0:
                clean += 1
                assert result.merged["main.txt"] == oracle_merged, (
                    f"case {case}: conflict-free oracle must match merged output exactly"
                )
            else:
                conflicted += 1
                assert any(c.path == "main.txt" for c in result.conflicts), (
                    f"case {case}: oracle conflict must surface as >=1 reported conflict"
                )
        assert clean >= 20 and conflicted >= 20, "generator must exercise both outcomes"
        report(f"propagation-vs-oracle (clean={clean}, conflicted={conflicted})", started, 20.0)


class TestQuizGradingOracle:
    def test_quiz_grading_oracle(self):
        started = time.monotonic()
        graded = 0
        for n in range(2, 5):
            for corrects in itertools.product([False, True], repeat=n):
                correct_set = {i for i, c in enumerate(corrects) if c}
                options = tuple(QuizOption(text=f"o{i}", correct=c) for i, c in enumerate(corrects))
                if len(correct_set) == 1:
                    spec = QuizSpec(mode=QuizMode.SINGLE, options=options)
                    for i in range(n):
                        verdict = grade_quiz(spec, {i}).status is CheckStatus.SOLVED
                        assert verdict == ({i} == correct_set)
                        graded += 1
                if correct_set:
                    spec = QuizSpec(mode=QuizMode.MULTIPLE, options=options)
                    for r in range(n + 1):
                        for subset in itertools.combinations(range(n), r):
                            verdict = grade_quiz(spec, set(subset)).status is CheckStatus.SOLVED
                            assert verdict == (set(subset) == correct_set)
                            graded += 1
        report(f"quiz-grading-oracle ({graded} gradings)", started, 1.0)


class TestCheckerProtocolConformance:
    def test_checker_protocol_conformance(self, tmp_path):
        started = time.monotonic()

        def run(name: str, body: str, timeout=None):
            ws = tmp_path / name
            ws.mkdir()
            (ws / "checker.py").write_text(body)
            spec = CommandChecker(command=(PY, "checker.py"), timeout_seconds=30)
            return run_command_checker(spec, ws, timeout)

        result = run("exit0", "import sys\nsys.exit(0)\n")
        assert result.status is CheckStatus.SOLVED

        result = run(
            "failed",
            'import json, os\n'
            'json.dump({"status": "failed", "message": "expected fib(5)=5"},'
            ' open(os.environ["EDU_RESULT_FILE"], "w"))\n',
        )
        assert result.status is CheckStatus.FAILED
        assert result.message == "expected fib(5)=5"

        result = run(
            "solved-nonzero",
            'import json, os, sys\n'
            'json.dump({"status": "solved", "message": "all good"},'
            ' open(os.environ["EDU_RESULT_FILE"], "w"))\n'
            "sys.exit(3)\n",
        )
        assert result.status is CheckStatus.SOLVED

        result = run("timeout", "import time\ntime.sleep(60)\n", timeout=1.0)
        assert result.status is CheckStatus.ERROR
        assert "check_timeout" in result.message
        report("checker-protocol-conformance", started, 30.0)


class TestSolutionHiding:
    def test_solution_hiding(self, demo_root, demo_course):
        started = time.monotonic()
        answers = []
        for _, _, _, task in iter_tasks(demo_course):
            answers.extend(placeholder_answers(task))
        assert answers, "demo course must carry placeholder answers"

        context = CheckContext(
            run_configs=demo_course.run_configs,
            style_rules=demo_course.style_rules,
            profiles=load_profiles(demo_root),
        )
        audited = 0
        for _, _, _, task in iter_tasks(demo_course):
            if task.code is None:
                continue
            checker_kind = type(task.code.checker).__name__
            if checker_kind not in ("StructuralChecker", "CommandChecker"):
                continue
            result = check(task, materialize(task, Mode.LEARNER), None, context)
            assert result.status in (CheckStatus.FAILED, CheckStatus.ERROR)
            surfaces = [result.message]
            if result.details is not None:
                surfaces.extend(result.details.violations)
                surfaces.extend(str(x) for x in (result.details.expected_excerpt, result.details.actual_excerpt) if x)
            for answer in answers:
                for surface in surfaces:
                    assert answer not in surface, (
                        f"{task.id}: feedback leaked a placeholder answer: {surface!r}"
                    )
            audited += 1
        assert audited >= 4, "demo course must exercise structural and command checkers"
        report(f"solution-hiding ({audited} failing checks audited)", started, 30.0)


class TestEndToEndHeadless:
    def test_end_to_end_headless(self, tmp_path, demo_root, demo_course):
        started = time.monotonic()
        course_root = tmp_path / "course"
        shutil.copytree(demo_root, course_root)
        session_dir = tmp_path / "session"
        session = Session.open(course_root, session_dir, case_timeout=20.0)
        try:
            with run_server(create_app(session)) as base:
                with httpx.Client(base_url=base, timeout=30) as client:
                    course = client.get("/api/course").json()
                    order = [
                        t["id"]
                        for s in course["sections"]
                        for l in s["lessons"]
                        for t in l["tasks"]
                    ]
                    assert course["current_task"] == order[0]

                    for position, task_id in enumerate(order):
                        view = client.get(f"/api/tasks/{task_id}").json()
                        assert view["status"] in ("in_progress", "not_started", "solved")

                        _, _, task = find_task(demo_course, task_id)
                        body = {}
                        if task.quiz is not None:
                            body = {"selection": sorted(task.quiz.correct_indices())}
                        if task.code is not None:
                            for file_view in view["files"]:
                                if not file_view["placeholders"]:
                                    continue
                                ws_path = Path(file_view["workspace_path"])
                                content = ws_path.read_text()
                                task_file = next(
                                    tf for tf in task.code.files if tf.path == file_view["path"]
                                )
                                for ph in sorted(
                                    file_view["placeholders"], key=lambda p: p["span"][0], reverse=True
                                ):
                                    start, end = ph["span"]
                                    answer = task_file.answer_text(ph["index"])
                                    content = content[:start] + answer + content[end:]
                                ws_path.write_text(content)

                        checked = client.post(f"/api/tasks/{task_id}/check", json=body).json()
                        assert checked["status"] == "solved", (task_id, checked)
                        assert checked["status_color"] == "green"

                        if position + 1 < len(order):
                            moved = client.post("/api/navigate", json={"direction": "next"}).json()
                            assert moved["new_task"] == order[position + 1]
                            assert moved["conflicts"] == []

                    progress = client.get("/api/progress").json()
                    assert progress["summary"]["percent_solved"] == 1.0
                    assert progress["summary"]["solved"] == len(order) == 9
                    assert all(v == "solved" for v in progress["statuses"].values())

                    tree = client.get("/api/course").json()
                    colors = [
                        t["status_color"]
                        for s in tree["sections"]
                        for l in s["lessons"]
                        for t in l["tasks"]
                    ]
                    assert colors == ["green"] * len(order)
        finally:
            session.close()

        # replaying the recorded usage events reproduces the final statuses
        store = load_store(session_dir)
        replayed = replay_statuses(store.events)
        finals = {tid: status for tid, status in store.statuses.items()}
        assert replayed == finals
        assert all(s is TaskStatus.SOLVED for s in replayed.values())
        report("end-to-end-headless", started, 60.0)


class TestStatusColorMapping:
    def test_status_color_mapping(self):
        started = time.monotonic()
        assert status_color(TaskStatus.SOLVED) == "green"
        assert status_color(TaskStatus.FAILED) == "red"
        assert status_color(TaskStatus.NOT_STARTED) == "gray"
        report("status-color-mapping", started, 1.0)
