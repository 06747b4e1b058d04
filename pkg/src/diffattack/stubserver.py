"""In-process HTTP stub serving a local model over the prediction protocol.

Useful for exercising the remote oracle client without a third-party
deployment: tests and demos start one on an ephemeral port, point a
RemoteOracle at it, and can inject server-side failures to observe the
client's retry behavior.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .oracle import AccessLevel, LocalModel, LocalOracle

__all__ = ["StubModelServer"]


class StubModelServer:
    """Serves ``POST /predict`` for one local model.

    Setting ``fail_next`` makes the next N predict requests answer HTTP 500,
    then normal service resumes. Use as a context manager or call
    ``start``/``stop`` explicitly.
    """

    def __init__(self, model: LocalModel,
                 access_level: AccessLevel = AccessLevel.FULL_DISTRIBUTION,
                 host: str = "127.0.0.1", port: int = 0):
        self._oracle = LocalOracle(model, access_level)
        self._lock = threading.Lock()
        self.fail_next = 0
        self.request_count = 0

        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802 (http.server API)
                server._handle(self)

            def log_message(self, *args):  # silence per-request stderr noise
                pass

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubModelServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "StubModelServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    # ------------------------------------------------------------------
    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        if handler.path != "/predict":
            self._send(handler, 404, {"error": "unknown path"})
            return
        with self._lock:
            self.request_count += 1
            if self.fail_next > 0:
                self.fail_next -= 1
                self._send(handler, 500, {"error": "injected failure"})
                return
        try:
            length = int(handler.headers.get("Content-Length", "0"))
            body = json.loads(handler.rfile.read(length))
            shape = tuple(int(d) for d in body["shape"])
            from .tensor import InputTensor
            x = InputTensor(shape, body["input"])
            with self._lock:
                pred = self._oracle.query(x)
        except Exception as exc:
            self._send(handler, 400, {"error": str(exc)})
            return
        self._send(handler, 200, pred.to_dict())

    @staticmethod
    def _send(handler: BaseHTTPRequestHandler, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        handler.send_response(status)
        handler.send_header("Content-Type", "application/json")
        handler.send_header("Content-Length", str(len(data)))
        handler.end_headers()
        handler.wfile.write(data)
