"""Line-based three-way merge for carrying learner code between tasks.

Line matching is delegated to ``difflib.SequenceMatcher`` (autojunk off, so
results depend only on content); chunk construction follows the classic
diff3 walk. Conflicting chunks always resolve to "ours" (the learner side)
so learner work is never silently destroyed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from difflib import SequenceMatcher


@dataclass
class MergeResult:
    lines: list[str]
    # Half-open 0-based line ranges in the merged output covering each
    # conflicting chunk (the learner lines that were kept).
    conflicts: list[tuple[int, int]] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(self.lines)


def _match_map(base: list[str], other: list[str]) -> dict[int, int]:
    sm = SequenceMatcher(None, base, other, autojunk=False)
    mapping: dict[int, int] = {}
    for block in sm.get_matching_blocks():
        for k in range(block.size):
            mapping[block.a + k] = block.b + k
    return mapping


def merge3(base: list[str], ours: list[str], theirs: list[str]) -> MergeResult:
    """Merge two descendants of ``base``; on conflict the ours chunk wins."""
    ma = _match_map(base, ours)
    mb = _match_map(base, theirs)
    n_o, n_a, n_b = len(base), len(ours), len(theirs)
    out: list[str] = []
    conflicts: list[tuple[int, int]] = []
    o = a = b = 0

    def emit_chunk(o2: int, a2: int, b2: int) -> None:
        nonlocal o, a, b
        base_c = base[o:o2]
        ours_c = ours[a:a2]
        theirs_c = theirs[b:b2]
        if ours_c == base_c:
            out.extend(theirs_c)
        elif theirs_c == base_c or ours_c == theirs_c:
            out.extend(ours_c)
        else:
            start = len(out)
            out.extend(ours_c)
            conflicts.append((start, len(out)))
        o, a, b = o2, a2, b2

    while o < n_o or a < n_a or b < n_b:
        # Consume the stable run: base lines matched in both descendants at
        # the current alignment.
        i = 0
        while o + i < n_o and ma.get(o + i) == a + i and mb.get(o + i) == b + i:
            i += 1
        if i:
            out.extend(base[o : o + i])
            o, a, b = o + i, a + i, b + i
            continue
        # Unstable region: find the next base line matched in both sides.
        o2 = o
        while o2 < n_o and not (o2 in ma and o2 in mb):
            o2 += 1
        if o2 < n_o:
            emit_chunk(o2, ma[o2], mb[o2])
        else:
            emit_chunk(n_o, n_a, n_b)
    return MergeResult(out, conflicts)


def merge3_text(base: str, ours: str, theirs: str) -> MergeResult:
    return merge3(
        base.splitlines(keepends=True),
        ours.splitlines(keepends=True),
        theirs.splitlines(keepends=True),
    )
