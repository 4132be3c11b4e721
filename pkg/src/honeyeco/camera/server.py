"""HTTP/1.1 listener for the camera honeypot."""

from __future__ import annotations

import ipaddress
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .app import SOURCE_TAG_HEADER, CameraApp, CameraProfile, CameraSession
from .signatures import HttpRequest

log = logging.getLogger(__name__)

MAX_BODY = 16 * 1024 * 1024


class CameraHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "CameraServer"
    session: CameraSession | None

    def setup(self) -> None:
        super().setup()
        self.session = None
        self._close_reason = "client_closed"

    def _ensure_session(self, tag: str | None = None) -> CameraSession:
        if self.session is None:
            ip = tag or self.client_address[0]
            self.session, _ = self.server.app.open_session(ip, self.client_address[1])
        return self.session

    def finish(self) -> None:
        try:
            super().finish()
        finally:
            if self.session is not None:
                self.server.app.close_session(self.session, self._close_reason)

    # silence default stderr access log; events are the log
    def log_message(self, format, *args) -> None:
        log.debug("%s - %s", self.client_address[0], format % args)

    def send_error(self, code, message=None, explain=None):
        if code == 400 or code == 414 or code == 431:
            session = self._ensure_session()
            raw = self.raw_requestline.decode("latin-1", "replace").rstrip("\r\n") if self.raw_requestline else ""
            resp, _ = self.server.app.bad_request(session, raw)
            self.close_connection = True
            # an unparseable line leaves the handler in HTTP/0.9 mode, which
            # would suppress the status line
            self.request_version = "HTTP/1.0"
            self._write(resp, head_only=False)
            return
        super().send_error(code, message, explain)

    def _source_tag(self) -> str | None:
        if not self.server.app.profile.accept_source_tag:
            return None
        value = self.headers.get(SOURCE_TAG_HEADER, "").strip()
        try:
            return str(ipaddress.ip_address(value)) if value else None
        except ValueError:
            return None

    def _dispatch(self) -> None:
        session = self._ensure_session(self._source_tag())
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(min(length, MAX_BODY)) if length > 0 else b""
        headers = {k: v for k, v in self.headers.items() if k.lower() != SOURCE_TAG_HEADER}
        request = HttpRequest.build(self.command, self.path, headers, body, session.src_ip, session.src_port)
        resp, _ = self.server.app.handle_request(request, session)
        self._write(resp, head_only=self.command == "HEAD")

    def _write(self, resp, head_only: bool) -> None:
        self.send_response(resp.status)
        for k, v in resp.headers.items():
            if k.lower() != "server":
                self.send_header(k, v)
        if resp.stream is not None:
            self.send_header("Connection", "close")
            self.close_connection = True
            self.end_headers()
            if not head_only:
                self._stream(resp.stream)
            return
        self.send_header("Content-Length", str(len(resp.body)))
        self.end_headers()
        if not head_only:
            self.wfile.write(resp.body)

    def _stream(self, parts) -> None:
        interval = 1.0 / self.server.app.profile.fps if self.server.app.profile.fps else 0.0
        try:
            for part in parts:
                if self.server.stopping.is_set():
                    break
                self.wfile.write(part)
                self.wfile.flush()
                if interval:
                    time.sleep(interval)
        except (BrokenPipeError, ConnectionResetError, OSError):
            self._close_reason = "stream_client_gone"

    def version_string(self) -> str:
        return self.server.app.profile.server_header

    do_GET = do_POST = do_HEAD = do_PUT = do_DELETE = do_OPTIONS = do_CONNECT = do_PATCH = _dispatch


class CameraServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    block_on_close = False

    def __init__(self, address: tuple[str, int], profile: CameraProfile, sink):
        self.app = CameraApp(profile, sink)
        self.stopping = threading.Event()
        super().__init__(address, CameraHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        t = threading.Thread(target=self.serve_forever, name="honeycamera", daemon=True)
        t.start()
        return t

    def shutdown(self) -> None:
        self.stopping.set()
        super().shutdown()


def serve(profile: CameraProfile, address: tuple[str, int], sink) -> None:
    with CameraServer(address, profile, sink) as server:
        log.info("honeycamera %s listening on %s:%d", profile.model, *server.server_address[:2])
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            sink.close()
