"""Local HTTP API driven by the web UI (or any client).

All endpoints speak JSON; ``/api/events`` is a server-sent event stream
delivering one ApiEvent per message in the order the session produced them.
The UI never grades anything itself: statuses and colors always come from
these payloads.
"""

from __future__ import annotations

import json
import queue
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .checkers import QuizSelectionError
from .model import status_color
from .session import AtCourseBoundary, Session, UnknownTask

EVENT_POLL_SECONDS = 0.5


class CheckRequest(BaseModel):
    selection: list[int] | None = None


class NavigateRequest(BaseModel):
    direction: str


def create_app(session: Session, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="eduengine", docs_url=None, redoc_url=None)

    @app.get("/api/course")
    def get_course() -> dict[str, Any]:
        return session.course_view()

    @app.get("/api/progress")
    def get_progress() -> dict[str, Any]:
        return session.progress_view()

    @app.get("/api/runconfigs")
    def get_runconfigs() -> list[dict[str, Any]]:
        return [
            {
                "name": rc.name,
                "command": list(rc.command),
                "working_dir": rc.working_dir,
                "env": dict(rc.env),
            }
            for rc in session.course.run_configs
        ]

    @app.get("/api/events")
    def get_events() -> StreamingResponse:
        def stream():
            q, unsubscribe = session.subscribe_events()
            try:
                while True:
                    try:
                        event = q.get(timeout=EVENT_POLL_SECONDS)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(event.to_dict(), sort_keys=True)}\n\n"
            finally:
                unsubscribe()

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/api/navigate")
    def post_navigate(body: NavigateRequest) -> dict[str, Any]:
        if body.direction not in ("next", "prev"):
            raise HTTPException(status_code=400, detail="direction must be next|prev")
        try:
            new_task, conflicts = session.navigate(body.direction)
        except AtCourseBoundary:
            raise HTTPException(status_code=409, detail="at_course_boundary")
        return {
            "new_task": new_task,
            "conflicts": [
                {"path": c.path, "hunk_range": list(c.hunk_range), "resolution": c.resolution}
                for c in conflicts
            ],
        }

    @app.post("/api/tasks/{task_id:path}/check")
    def post_check(task_id: str, body: CheckRequest | None = None) -> dict[str, Any]:
        selection = body.selection if body is not None else None
        try:
            result = session.check_task(task_id, selection)
        except UnknownTask:
            raise HTTPException(status_code=404, detail=f"unknown task: {task_id}")
        except QuizSelectionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        status = session.store.status_of(task_id)
        return {
            "result": result.to_dict(),
            "status": status.value,
            "status_color": status_color(status),
        }

    @app.post("/api/tasks/{task_id:path}/reset")
    def post_reset(task_id: str) -> dict[str, Any]:
        try:
            session.reset(task_id)
        except UnknownTask:
            raise HTTPException(status_code=404, detail=f"unknown task: {task_id}")
        status = session.store.status_of(task_id)
        return {"status": status.value, "status_color": status_color(status)}

    @app.get("/api/tasks/{task_id:path}")
    def get_task(task_id: str) -> dict[str, Any]:
        try:
            return session.view_task(task_id)
        except UnknownTask:
            raise HTTPException(status_code=404, detail=f"unknown task: {task_id}")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
