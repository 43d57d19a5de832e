"""Independent reference implementations used as test oracles.

These deliberately share nothing with the engine's own merge/materialize
code paths beyond the stdlib line matcher: the oracle diff3 walks 1-based
match dictionaries in the classic region style, while the engine walks
0-based chunk boundaries.
"""

from __future__ import annotations

import random
from difflib import SequenceMatcher


def _match_dict(olines: list[str], dlines: list[str]) -> dict[int, int]:
    """1-based o-line -> d-line for lines the matcher calls equal."""
    sm = SequenceMatcher(None, olines, dlines, autojunk=False)
    matches: dict[int, int] = {}
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            for k in range(i2 - i1):
                matches[i1 + k + 1] = j1 + k + 1
    return matches


class Diff3Oracle:
    """Classic diff3 over (ours, base, theirs); conflicts keep ours."""

    def __init__(self, ours: list[str], base: list[str], theirs: list[str]) -> None:
        self.o = base
        self.a = ours
        self.b = theirs
        self.am = _match_dict(base, ours)
        self.bm = _match_dict(base, theirs)
        self.on = self.an = self.bn = 0
        self.out: list[str] = []
        self.conflicts = 0

    def merge(self) -> tuple[list[str], int]:
        while True:
            i = self._find_next_mismatch()
            if i is None:
                self._final_chunk()
                return self.out, self.conflicts
            if i == 1:
                o, a, b = self._find_next_match()
                if a is not None and b is not None:
                    self._emit(o, a, b)
                else:
                    self._final_chunk()
                    return self.out, self.conflicts
            else:
                self._emit(self.on + i, self.an + i, self.bn + i)

    def _in_bounds(self, i: int) -> bool:
        return (
            self.on + i <= len(self.o)
            or self.an + i <= len(self.a)
            or self.bn + i <= len(self.b)
        )

    def _find_next_mismatch(self) -> int | None:
        i = 1
        while (
            self._in_bounds(i)
            and self.am.get(self.on + i) == self.an + i
            and self.bm.get(self.on + i) == self.bn + i
        ):
            i += 1
        return i if self._in_bounds(i) else None

    def _find_next_match(self) -> tuple[int, int | None, int | None]:
        o = self.on + 1
        while o <= len(self.o) and not (o in self.am and o in self.bm):
            o += 1
        if o <= len(self.o):
            return o, self.am[o], self.bm[o]
        return o, None, None

    def _emit(self, o: int, a: int, b: int) -> None:
        oc = self.o[self.on : o - 1]
        ac = self.a[self.an : a - 1]
        bc = self.b[self.bn : b - 1]
        if oc == ac and oc == bc:
            self.out.extend(oc)
        elif oc == ac:
            self.out.extend(bc)
        elif oc == bc or ac == bc:
            self.out.extend(ac)
        else:
            self.conflicts += 1
            self.out.extend(ac)
        self.on, self.an, self.bn = o - 1, a - 1, b - 1

    def _final_chunk(self) -> None:
        self._emit(len(self.o) + 1, len(self.a) + 1, len(self.b) + 1)


def diff3_text(ours: str, base: str, theirs: str) -> tuple[str, int]:
    merged, conflicts = Diff3Oracle(
        ours.splitlines(keepends=True),
        base.splitlines(keepends=True),
        theirs.splitlines(keepends=True),
    ).merge()
    return "".join(merged), conflicts


def backward_substitution(template: str, placeholders) -> str:
    """Stub substitution done back-to-front, so no offset shifting is needed;
    independent of the engine's forward pass."""
    text = template
    for p in reversed(list(placeholders)):
        text = text[: p.offset] + p.stub_text + text[p.offset + p.length :]
    return text


# ---------------------------------------------------------------------------
# randomized instance generators (seeded by the caller)

_WORDS = [
    "total", "value", "index", "limit", "count", "parse", "queue", "stack",
    "width", "shape", "token", "score", "delta", "merge", "input", "label",
]


def random_code_line(rng: random.Random, salt: int) -> str:
    kind = rng.randrange(6)
    w = rng.choice(_WORDS)
    if kind == 0:
        return ""
    if kind == 1:
        return f"{w}_{salt} = {rng.randrange(100)}"
    if kind == 2:
        return f"print({w}_{salt})"
    if kind == 3:
        return f"if {w}_{salt} > {rng.randrange(10)}:"
    if kind == 4:
        return f"    {w} = {w}_{salt} + {rng.randrange(10)}"
    return f"# note {w} {salt}"


def random_file(rng: random.Random, max_lines: int = 40) -> list[str]:
    n = rng.randint(3, max_lines)
    return [random_code_line(rng, i) + "\n" for i in range(n)]


def random_edit(rng: random.Random, lines: list[str], max_ops: int, max_span: int, salt: int) -> list[str]:
    """Apply a few randomly placed replace/insert/delete edits."""
    out = list(lines)
    for op in range(rng.randint(1, max_ops)):
        if not out:
            break
        start = rng.randrange(len(out) + 1)
        del_n = rng.randint(0, min(max_span, len(out) - start))
        ins_n = rng.randint(0, max_span)
        if del_n == 0 and ins_n == 0:
            ins_n = 1
        inserted = [random_code_line(rng, 1000 + salt * 100 + op * 10 + k) + "\n" for k in range(ins_n)]
        out[start : start + del_n] = inserted
    return out
