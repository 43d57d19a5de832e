from __future__ import annotations

import contextlib
import socket
import sys
import threading
import time
from pathlib import Path

import pytest
import uvicorn

sys.path.insert(0, str(Path(__file__).parent))  # oracles / generators helpers

from eduengine.courseformat import load_course
from eduengine.templates import scaffold


@contextlib.contextmanager
def run_server(app):
    """Serve an ASGI app on a free localhost port in a background thread.

    The in-process test client buffers endless streams, so SSE tests go
    through a real server.
    """
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline or not thread.is_alive():
            raise RuntimeError("server failed to start")
        time.sleep(0.02)
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=10)


@pytest.fixture(scope="session")
def demo_root(tmp_path_factory) -> Path:
    """The framework-demo course, scaffolded once; treat as read-only."""
    root = tmp_path_factory.mktemp("demo-course") / "demo"
    scaffold("framework-demo", root)
    return root


@pytest.fixture(scope="session")
def demo_course(demo_root):
    return load_course(demo_root)


@pytest.fixture()
def basic_root(tmp_path) -> Path:
    root = tmp_path / "basic"
    scaffold("basic", root)
    return root
