"""Course scaffolding.

Two starter courses: ``basic`` (one plain lesson with a theory, quiz, and
code task) and ``framework-demo`` (the basic material plus output, structural,
and command checkers and a three-task framework lesson). Both scaffold to a
directory that loads and validates cleanly and whose checkers pass on the
reference solutions.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .courseformat import DestNotEmpty, PROFILE_DIR, save_course
from .model import (
    CodeSpec,
    CommandChecker,
    Course,
    DeclaresFunction,
    IndentMultipleOf,
    IoCase,
    Lesson,
    LessonKind,
    MatchNormalize,
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
)

TEMPLATE_NAMES = ("basic", "framework-demo")


def _ph(template: str, answer: str, stub: str, hints: tuple[str, ...] = ()) -> Placeholder:
    """Placeholder over the (unique) occurrence of ``answer`` in the template."""
    offset = template.index(answer)
    if template.find(answer, offset + 1) != -1:
        raise ValueError(f"answer text occurs more than once: {answer!r}")
    return Placeholder(offset=offset, length=len(answer), stub_text=stub, hints=hints)


PYLINE_PROFILE = {
    "rules": [
        {
            "kind": "function",
            "pattern": r"^\s*def\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<params>[^)]*)\)",
        },
        {"kind": "type", "pattern": r"^\s*class\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)"},
    ]
}

BRACES_PROFILE = {
    "rules": [
        {
            "kind": "function",
            "pattern": (
                r"^\s*(?:(?:public|private|internal|protected|open|override|suspend)\s+)*"
                r"fun\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<params>[^)]*)\)"
            ),
        },
        {
            "kind": "type",
            "pattern": (
                r"^\s*(?:(?:public|private|internal|abstract|open|data|sealed)\s+)*"
                r"(?:class|interface|object)\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
            ),
        },
    ]
}


# --- plain lesson tasks -----------------------------------------------------

WELCOME_MD = """\
# Welcome

This course runs entirely in your own tools: read tasks here, edit the
workspace files with any editor you like, and check your solutions when
you are ready.

Use **Check** on this task once you have read it; theory tasks complete by
acknowledgment.

```hint
The course tree on the left tracks your progress: solved tasks turn green,
failed ones red.
```
"""

QUIZ_MD = """\
# Comments

Python programs carry notes for humans that the interpreter ignores.

Which symbol starts a comment in Python?
"""

GREET_TEMPLATE = """\
def greet(name):
    return "Hello, " + name + "!"


print(greet("world"))
"""

GREET_MD = """\
# Build a greeting

Open `main.py` in the workspace and replace the placeholder so that
`greet("world")` evaluates to `Hello, world!`.

```hint
String concatenation with `+` joins the pieces together.
```
"""

SUM_TEMPLATE = """\
values = input().split()
print(sum(int(v) for v in values))
"""

SUM_MD = """\
# Sum of a line

The program reads one line of whitespace-separated integers and must print
their sum. Replace the placeholder in `main.py`; the checker feeds the
program sample inputs and compares the output.
"""

SHAPES_TEMPLATE = """\
def area_square(side):
    return side * side


def area_rect(width, height):
    return width * height
"""

SHAPES_STUB = """\
# TODO: define area_square(side) and area_rect(width, height)
"""

SHAPES_MD = """\
# Area functions

Write `main.py` from scratch: define `area_square(side)` and
`area_rect(width, height)`. The checker inspects the structure of your
code, so mind the course style rules (4-space indents, lines under 100
characters).
"""

FIB_TEMPLATE = """\
def fib(n):
    if n < 2:
        return n
    return fib(n - 1) + fib(n - 2)
"""

FIB_ANSWER = """\
    if n < 2:
        return n
    return fib(n - 1) + fib(n - 2)
"""

FIB_STUB = """\
    return 0  # TODO: base case, then recursion
"""

FIB_MD = """\
# Fibonacci

Implement `fib(n)` in `main.py` so it returns the n-th Fibonacci number
(`fib(0) = 0`, `fib(1) = 1`). The author's tests run against your file.
"""

FIB_CHECK = """\
import json
import os
import sys

sys.path.insert(0, os.getcwd())


def run():
    try:
        import main
    except Exception as exc:
        return {"status": "failed", "message": "importing main.py failed: %s" % exc}
    for n, want in [(0, 0), (1, 1), (2, 1), (7, 13), (10, 55)]:
        try:
            got = main.fib(n)
        except Exception as exc:
            return {"status": "failed", "message": "fib(%d) raised %s" % (n, exc)}
        if got != want:
            return {"status": "failed", "message": "expected fib(%d) = %d, got %r" % (n, want, got)}
    return {"status": "solved", "message": "fib passes all checks"}


result = run()
path = os.environ.get("EDU_RESULT_FILE")
if path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result, fh)
sys.exit(0 if result["status"] == "solved" else 1)
"""


def _theory_task() -> Task:
    return Task(id="welcome", title="Welcome", description=WELCOME_MD)


def _quiz_task() -> Task:
    return Task(
        id="comments-quiz",
        title="Comment syntax",
        description=QUIZ_MD,
        quiz=QuizSpec(
            mode=QuizMode.SINGLE,
            options=(
                QuizOption(text="//", feedback="That is a C-family comment marker."),
                QuizOption(text="#", correct=True),
                QuizOption(text="--", feedback="That is SQL, not Python."),
            ),
            correct_feedback="Right! Python comments start with #.",
        ),
    )


def _greet_task() -> Task:
    return Task(
        id="greet",
        title="Build a greeting",
        description=GREET_MD,
        code=CodeSpec(
            files=(
                TaskFile(
                    path="main.py",
                    template=GREET_TEMPLATE,
                    placeholders=(
                        _ph(
                            GREET_TEMPLATE,
                            '"Hello, " + name + "!"',
                            "None  # TODO: build the greeting",
                            ('Join "Hello, ", the name, and "!" using +.',),
                        ),
                    ),
                ),
            ),
            checker=PlaceholderMatchChecker(normalize=MatchNormalize.TOKEN_WHITESPACE),
        ),
    )


def _sum_task() -> Task:
    return Task(
        id="sum-io",
        title="Sum of a line",
        description=SUM_MD,
        code=CodeSpec(
            files=(
                TaskFile(
                    path="main.py",
                    template=SUM_TEMPLATE,
                    placeholders=(
                        _ph(
                            SUM_TEMPLATE,
                            "sum(int(v) for v in values)",
                            "0  # TODO: sum the values",
                            ("Combine sum() with a generator that converts each item using int().",),
                        ),
                    ),
                ),
            ),
            checker=OutputCompareChecker(
                run="run-main",
                cases=(
                    IoCase(stdin="1 2 3\n", expected_stdout="6\n"),
                    IoCase(stdin="10 -4\n", expected_stdout="6\n"),
                    IoCase(stdin="41\n", expected_stdout="41\n"),
                ),
            ),
        ),
    )


def _shapes_task() -> Task:
    return Task(
        id="shapes",
        title="Area functions",
        description=SHAPES_MD,
        code=CodeSpec(
            files=(
                TaskFile(
                    path="main.py",
                    template=SHAPES_TEMPLATE,
                    placeholders=(
                        Placeholder(
                            offset=0,
                            length=len(SHAPES_TEMPLATE),
                            stub_text=SHAPES_STUB,
                            hints=("Each function takes its measurements and returns one product.",),
                        ),
                    ),
                ),
            ),
            checker=StructuralChecker(
                profile="pyline",
                assertions=(
                    DeclaresFunction(name="area_square", arity=1),
                    DeclaresFunction(name="area_rect", arity=2),
                    MaxLineLength(limit=100),
                    IndentMultipleOf(n=4),
                ),
            ),
        ),
    )


def _fib_task() -> Task:
    return Task(
        id="fib",
        title="Fibonacci",
        description=FIB_MD,
        code=CodeSpec(
            files=(
                TaskFile(
                    path="main.py",
                    template=FIB_TEMPLATE,
                    placeholders=(
                        _ph(
                            FIB_TEMPLATE,
                            FIB_ANSWER,
                            FIB_STUB,
                            ("Return n itself below 2; otherwise add the two previous values.",),
                        ),
                    ),
                ),
                TaskFile(path="tests/check_fib.py", template=FIB_CHECK, visible=False),
            ),
            checker=CommandChecker(command=("python3", "tests/check_fib.py"), timeout_seconds=30),
        ),
    )


# --- framework lesson --------------------------------------------------------

# Each task's template repeats the earlier stubs verbatim and appends the new
# function above the footer, so the author diff between adjacent tasks is a
# pure insertion anchored between unchanged lines, and the learner's own
# edits merge in cleanly.
CALC_T1 = """\
def add(a, b):
    return a + b


if __name__ == "__main__":
    print("calc ready")
"""

CALC_T2 = """\
def add(a, b):
    return 0  # TODO: add a and b


def subtract(a, b):
    return a - b


if __name__ == "__main__":
    print("calc ready")
"""

CALC_T3 = """\
def add(a, b):
    return 0  # TODO: add a and b


def subtract(a, b):
    return 0  # TODO: subtract b from a


def multiply(a, b):
    return a * b


if __name__ == "__main__":
    print("calc ready")
"""

CALC_CHECK = """\
import json
import os
import sys

sys.path.insert(0, os.getcwd())

CASES = %(cases)s


def run():
    try:
        import calc
    except Exception as exc:
        return {"status": "failed", "message": "importing calc.py failed: %%s" %% exc}
    for name, a, b, want in CASES:
        fn = getattr(calc, name, None)
        if fn is None:
            return {"status": "failed", "message": "calc.py does not define %%s" %% name}
        try:
            got = fn(a, b)
        except Exception as exc:
            return {"status": "failed", "message": "%%s(%%r, %%r) raised %%s" %% (name, a, b, exc)}
        if got != want:
            return {
                "status": "failed",
                "message": "expected %%s(%%r, %%r) = %%r, got %%r" %% (name, a, b, want, got),
            }
    return {"status": "solved", "message": "calculator checks passed"}


result = run()
path = os.environ.get("EDU_RESULT_FILE")
if path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result, fh)
sys.exit(0 if result["status"] == "solved" else 1)
"""

CALC_MD = {
    "add": """\
# A tiny calculator: addition

This lesson grows one file, `calc.py`, across three tasks; your code carries
over automatically when you navigate. Start by making `add(a, b)` return the
sum.
""",
    "subtract": """\
# A tiny calculator: subtraction

`calc.py` now gained a `subtract(a, b)` skeleton. Make it return `a` minus
`b`; your earlier work on `add` stays in place.
""",
    "multiply": """\
# A tiny calculator: multiplication

Last step: implement `multiply(a, b)`. After this task the whole calculator
is yours.
""",
}


def _calc_check(cases: list[tuple[str, int, int, int]]) -> str:
    return CALC_CHECK % {"cases": repr(cases)}


def _calc_task(task_id: str, title: str, template: str, answer: str, stub: str, hint: str, cases) -> Task:
    return Task(
        id=task_id,
        title=title,
        description=CALC_MD[task_id],
        code=CodeSpec(
            files=(
                TaskFile(
                    path="calc.py",
                    template=template,
                    placeholders=(_ph(template, answer, stub, (hint,)),),
                ),
                TaskFile(path="tests/check_calc.py", template=_calc_check(cases), visible=False),
            ),
            checker=CommandChecker(command=("python3", "tests/check_calc.py"), timeout_seconds=30),
        ),
    )


def _framework_lesson() -> Lesson:
    return Lesson(
        id="calculator",
        title="A tiny calculator",
        kind=LessonKind.FRAMEWORK,
        tasks=(
            _calc_task(
                "add",
                "Addition",
                CALC_T1,
                "a + b",
                "0  # TODO: add a and b",
                "Use the + operator.",
                [("add", 2, 3, 5), ("add", -1, 1, 0), ("add", 10, 32, 42)],
            ),
            _calc_task(
                "subtract",
                "Subtraction",
                CALC_T2,
                "a - b",
                "0  # TODO: subtract b from a",
                "Use the - operator.",
                [("subtract", 5, 3, 2), ("subtract", 3, 5, -2), ("subtract", 0, 7, -7)],
            ),
            _calc_task(
                "multiply",
                "Multiplication",
                CALC_T3,
                "a * b",
                "0  # TODO: multiply a and b",
                "Use the * operator.",
                [("multiply", 2, 3, 6), ("multiply", -2, 4, -8), ("multiply", 7, 6, 42)],
            ),
        ),
    )


# --- course assembly ----------------------------------------------------------


def build_course(template: str) -> Course:
    if template == "basic":
        return Course(
            id="sample-course",
            title="Sample Course",
            description="A starter course with one task of every kind.",
            subject_language="python",
            sections=(
                Section(
                    id="basics",
                    title="Getting Started",
                    lessons=(
                        Lesson(
                            id="intro",
                            title="Introduction",
                            kind=LessonKind.PLAIN,
                            tasks=(_theory_task(), _quiz_task(), _greet_task()),
                        ),
                    ),
                ),
            ),
            style_rules=StyleRules(indent_size=4, max_blank_lines=2, max_line_length=100),
            run_configs=(RunConfig(name="run-main", command=("python3", "main.py")),),
        )
    if template == "framework-demo":
        return Course(
            id="edu-demo",
            title="Engine Demo Course",
            description="Theory, quiz, and code tasks with every checker kind, plus a framework lesson.",
            subject_language="python",
            sections=(
                Section(
                    id="basics",
                    title="Python Basics",
                    lessons=(
                        Lesson(
                            id="intro",
                            title="Introduction",
                            kind=LessonKind.PLAIN,
                            tasks=(
                                _theory_task(),
                                _quiz_task(),
                                _greet_task(),
                                _sum_task(),
                                _shapes_task(),
                                _fib_task(),
                            ),
                        ),
                    ),
                ),
                Section(
                    id="projects",
                    title="Projects",
                    lessons=(_framework_lesson(),),
                ),
            ),
            style_rules=StyleRules(indent_size=4, max_blank_lines=2, max_line_length=100),
            run_configs=(RunConfig(name="run-main", command=("python3", "main.py")),),
        )
    raise ValueError(f"unknown template '{template}' (available: {', '.join(TEMPLATE_NAMES)})")


def scaffold(template: str, dest: Path | str) -> Path:
    """Create a ready-to-use course directory from a template."""
    dest = Path(dest)
    if dest.exists() and (not dest.is_dir() or any(dest.iterdir())):
        raise DestNotEmpty(f"{dest} is not empty")
    course = build_course(template)
    save_course(course, dest)
    profile_dir = dest / PROFILE_DIR
    profile_dir.mkdir(parents=True, exist_ok=True)
    for key, data in (("pyline", PYLINE_PROFILE), ("braces", BRACES_PROFILE)):
        (profile_dir / f"{key}.yaml").write_text(
            yaml.safe_dump(data, sort_keys=True, default_flow_style=False), encoding="utf-8"
        )
    return dest
