from __future__ import annotations

import json
import random

import pytest

from eduengine.model import CheckDetails, CheckResult, CheckStatus, TaskStatus
from eduengine.progress import (
    EventKind,
    ProgressStore,
    UnknownTask,
    load_store,
    mark_viewed,
    record_check,
    record_course_opened,
    record_navigation,
    record_reset,
    replay_statuses,
    save_store,
    usage_stats,
)

TASKS = {"s/l/t1", "s/l/t2", "s/l/t3"}


def solved(message="ok"):
    return CheckResult(CheckStatus.SOLVED, message)


def failed(message="nope"):
    return CheckResult(CheckStatus.FAILED, message)


def fresh():
    return ProgressStore(course_id="c")


class TestRecordCheck:
    def test_solved_updates_status_and_events(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.SOLVED
        assert len(store.submissions) == 1
        kinds = [e.kind for e in store.events]
        assert kinds == [EventKind.CHECK_RUN, EventKind.TASK_SOLVED]

    def test_latest_check_wins(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        store = record_check(store, "s/l/t1", failed(), valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.FAILED

    def test_error_leaves_status_but_records_submission(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        error = CheckResult(CheckStatus.ERROR, "checker_unavailable")
        store = record_check(store, "s/l/t1", error, valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.SOLVED
        assert len(store.submissions) == 2

    def test_re_solving_adds_no_second_solved_event(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        store = record_check(store, "s/l/t1", solved(), valid_task_ids=TASKS)
        assert sum(1 for e in store.events if e.kind is EventKind.TASK_SOLVED) == 1

    def test_unknown_task(self):
        with pytest.raises(UnknownTask):
            record_check(fresh(), "nope", solved(), valid_task_ids=TASKS)

    def test_submission_timestamp_equals_result(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        submission = store.submissions[0]
        assert submission.timestamp == submission.result.checked_at

    def test_quiz_selection_kept_sorted(self):
        store = record_check(fresh(), "s/l/t1", solved(), selection={2, 0}, valid_task_ids=TASKS)
        assert store.submissions[0].quiz_selection == (0, 2)


class TestMarkViewed:
    def test_not_started_becomes_in_progress(self):
        store = mark_viewed(fresh(), "s/l/t1", valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.IN_PROGRESS

    def test_solved_stays_solved(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        store = mark_viewed(store, "s/l/t1", valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.SOLVED

    def test_double_view_two_events_stable_status(self):
        store = mark_viewed(mark_viewed(fresh(), "s/l/t1"), "s/l/t1")
        assert store.statuses["s/l/t1"] is TaskStatus.IN_PROGRESS
        assert sum(1 for e in store.events if e.kind is EventKind.TASK_VIEWED) == 2


class TestReset:
    def test_reset_clears_status(self):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        store = record_reset(store, "s/l/t1", valid_task_ids=TASKS)
        assert store.statuses["s/l/t1"] is TaskStatus.NOT_STARTED


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        store = fresh()
        store = record_course_opened(store)
        store = mark_viewed(store, "s/l/t1", valid_task_ids=TASKS)
        result = CheckResult(CheckStatus.FAILED, "nope", CheckDetails(violations=("v1",)))
        store = record_check(store, "s/l/t1", result, valid_task_ids=TASKS)
        store = record_navigation(store, "s/l/t2", forward=True)
        save_store(store, tmp_path)
        loaded = load_store(tmp_path)
        assert loaded == store

    def test_events_append_only_on_disk(self, tmp_path):
        store = record_course_opened(fresh())
        save_store(store, tmp_path)
        first = (tmp_path / "events.jsonl").read_text()
        store = mark_viewed(store, "s/l/t1")
        save_store(store, tmp_path)
        second = (tmp_path / "events.jsonl").read_text()
        assert second.startswith(first)
        assert len(second.splitlines()) == 2

    def test_corrupt_snapshot_recovery(self, tmp_path):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        save_store(store, tmp_path)
        (tmp_path / "progress.json").write_text("{ truncated...")
        loaded = load_store(tmp_path, course_id="c")
        assert loaded.statuses == {}
        backups = list(tmp_path.glob("progress.json.corrupt-*"))
        assert len(backups) == 1
        # events survive the corrupt snapshot
        assert any(e.kind is EventKind.TASK_SOLVED for e in loaded.events)

    def test_unknown_snapshot_fields_preserved(self, tmp_path):
        store = fresh()
        save_store(store, tmp_path)
        data = json.loads((tmp_path / "progress.json").read_text())
        data["future_field"] = {"x": 1}
        (tmp_path / "progress.json").write_text(json.dumps(data))
        loaded = load_store(tmp_path)
        save_store(loaded, tmp_path)
        assert json.loads((tmp_path / "progress.json").read_text())["future_field"] == {"x": 1}

    def test_stale_task_keys_load_fine(self, tmp_path):
        store = record_check(fresh(), "s/l/t1", solved(), valid_task_ids=TASKS)
        save_store(store, tmp_path)
        loaded = load_store(tmp_path)
        assert loaded.statuses["s/l/t1"] is TaskStatus.SOLVED

    def test_unreadable_event_lines_skipped(self, tmp_path):
        store = record_course_opened(fresh())
        save_store(store, tmp_path)
        with (tmp_path / "events.jsonl").open("a") as fh:
            fh.write("not json\n")
        loaded = load_store(tmp_path)
        assert len(loaded.events) == 1

    def test_corrupt_event_line_does_not_swallow_new_events(self, tmp_path):
        store = record_course_opened(fresh())
        save_store(store, tmp_path)
        with (tmp_path / "events.jsonl").open("a") as fh:
            fh.write("not json\n")
        loaded = load_store(tmp_path)
        updated = mark_viewed(loaded, "s/l/t1")
        save_store(updated, tmp_path)
        assert len(load_store(tmp_path).events) == 2

    def test_random_operation_sequences_roundtrip(self, tmp_path):
        rng = random.Random(4242)
        tasks = sorted(TASKS)
        for i in range(25):
            store = fresh()
            for _ in range(rng.randint(0, 15)):
                op = rng.randrange(5)
                task = rng.choice(tasks)
                if op == 0:
                    store = mark_viewed(store, task, valid_task_ids=TASKS)
                elif op == 1:
                    store = record_check(store, task, solved(), valid_task_ids=TASKS)
                elif op == 2:
                    store = record_check(store, task, failed(), selection={0}, valid_task_ids=TASKS)
                elif op == 3:
                    store = record_navigation(store, task, forward=rng.random() < 0.5)
                else:
                    store = record_reset(store, task, valid_task_ids=TASKS)
            target = tmp_path / f"case{i}"
            save_store(store, target)
            assert load_store(target) == store


class TestAppendOnlyInvariant:
    def test_every_operation_extends_events(self):
        store = fresh()
        steps = [
            lambda s: record_course_opened(s),
            lambda s: mark_viewed(s, "s/l/t1"),
            lambda s: record_check(s, "s/l/t1", solved()),
            lambda s: record_navigation(s, "s/l/t2", True),
            lambda s: record_reset(s, "s/l/t1"),
        ]
        for step in steps:
            new = step(store)
            assert new.events[: len(store.events)] == store.events
            assert len(new.events) > len(store.events)
            store = new


class TestUsageStats:
    def test_empty(self):
        stats = usage_stats(fresh())
        assert (stats.checks, stats.solved_tasks) == (0, 0)
        assert stats.events_by_kind == {}

    def test_check_counter(self):
        store = fresh()
        for _ in range(3):
            store = record_check(store, "s/l/t1", failed())
        assert usage_stats(store).checks == 3

    def test_solved_tasks(self):
        store = record_check(fresh(), "s/l/t1", solved())
        store = record_check(store, "s/l/t2", solved())
        assert usage_stats(store).solved_tasks == 2

    def test_checks_increment_per_call(self):
        store = fresh()
        for i in range(5):
            before = usage_stats(store).checks
            store = record_check(store, "s/l/t1", solved())
            assert usage_stats(store).checks == before + 1


class TestReplay:
    def test_replay_reproduces_solved_statuses(self):
        store = mark_viewed(fresh(), "s/l/t1")
        store = record_check(store, "s/l/t1", solved())
        store = mark_viewed(store, "s/l/t2")
        store = record_check(store, "s/l/t2", solved())
        assert replay_statuses(store.events) == dict(store.statuses)

    def test_replay_reset_then_view(self):
        store = record_check(fresh(), "s/l/t1", solved())
        store = record_reset(store, "s/l/t1")
        store = mark_viewed(store, "s/l/t1")
        assert replay_statuses(store.events)["s/l/t1"] is TaskStatus.IN_PROGRESS
