"""Minimal scripted clients for the shell and camera honeypots."""

from __future__ import annotations

import base64
import http.client
import re
import socket
import time
from dataclasses import dataclass, field

_PROMPT = re.compile(rb"\S+@\S+:\S*# ")
_PROMPT_TEXT = re.compile(r"\S+@\S+:\S*# $")
_LOGIN = re.compile(rb"login: ")
_PASSWORD = re.compile(rb"Password: ")
_LOGIN_OR_PROMPT = re.compile(rb"login: |\S+@\S+:\S*# ")


class ShellClientError(ConnectionError):
    pass


@dataclass
class ShellTranscript:
    logged_in: bool = False
    attempts: int = 0
    outputs: list[tuple[str, str]] = field(default_factory=list)
    latencies: list[float] = field(default_factory=list)
    banner: str = ""


class ShellClient:
    def __init__(self, host: str, port: int, timeout: float = 10.0, source_tag: str | None = None):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.buf = b""
        if source_tag:
            self.sock.sendall(f"#srctag {source_tag}\r\n".encode())

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self) -> "ShellClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _read_until(self, pattern: re.Pattern) -> bytes:
        """Return everything up to the end of the first ``pattern`` match;
        bytes after it stay buffered for the next read."""
        while True:
            m = pattern.search(self.buf)
            if m:
                out, self.buf = self.buf[: m.end()], self.buf[m.end():]
                return out
            chunk = self.sock.recv(4096)
            if not chunk:
                out, self.buf = self.buf, b""
                raise ShellClientError(f"connection closed; partial output {out[-200:]!r}")
            self.buf += chunk

    def send_line(self, line: str) -> None:
        self.sock.sendall(line.encode("utf-8") + b"\r\n")

    def read_banner(self) -> str:
        return self._read_until(_LOGIN).decode("utf-8", "replace")

    def login(self, username: str, password: str) -> bool:
        """Answer one login prompt; the banner/login prompt must already
        have been consumed. Returns True once a shell prompt appears."""
        self.send_line(username)
        self._read_until(_PASSWORD)
        self.send_line(password)
        try:
            out = self._read_until(_LOGIN_OR_PROMPT)
        except ShellClientError:
            return False
        return bool(_PROMPT.search(out))

    def run(self, command: str) -> str:
        self.send_line(command)
        out = self._read_until(_PROMPT)
        text = out.decode("utf-8", "replace").replace("\r\n", "\n")
        return _PROMPT_TEXT.sub("", text)

    def exit(self) -> None:
        try:
            self.send_line("exit")
            self.sock.recv(1024)
        except OSError:
            pass


def shell_session(
    host: str,
    port: int,
    credentials: list[tuple[str, str]],
    commands: list[str],
    source_tag: str | None = None,
    delay: float = 0.0,
    timeout: float = 10.0,
) -> ShellTranscript:
    """Try credentials (one connection per 3 attempts) and run commands once
    logged in."""
    tr = ShellTranscript()
    pending = list(credentials)
    while pending and not tr.logged_in:
        batch, pending = pending[:3], pending[3:]
        with ShellClient(host, port, timeout, source_tag) as c:
            tr.banner = c.read_banner()
            for user, pwd in batch:
                tr.attempts += 1
                if c.login(user, pwd):
                    tr.logged_in = True
                    break
            if not tr.logged_in:
                # the server drops the connection after its attempt limit
                continue
            for cmd in commands:
                start = time.monotonic()
                out = c.run(cmd)
                tr.latencies.append(time.monotonic() - start)
                tr.outputs.append((cmd, out))
                if delay:
                    time.sleep(delay)
            c.exit()
    return tr


@dataclass
class HttpResult:
    method: str
    target: str
    status: int
    body: bytes


def http_requests(
    host: str,
    port: int,
    requests: list[dict],
    source_tag: str | None = None,
    timeout: float = 10.0,
) -> list[HttpResult]:
    """Send requests over one keep-alive connection. Each request dict holds
    method, target, optional headers/body and optional ``auth`` (user, pwd)."""
    results = []
    conn = http.client.HTTPConnection(host, port, timeout=timeout)
    try:
        for r in requests:
            headers = dict(r.get("headers", {}))
            if source_tag:
                headers["X-Source-Tag"] = source_tag
            if r.get("auth"):
                user, pwd = r["auth"]
                headers["Authorization"] = "Basic " + base64.b64encode(f"{user}:{pwd}".encode()).decode()
            body = r.get("body")
            if isinstance(body, str):
                body = body.encode()
            conn.request(r.get("method", "GET"), r["target"], body=body, headers=headers)
            resp = conn.getresponse()
            data = resp.read()
            results.append(HttpResult(r.get("method", "GET"), r["target"], resp.status, data))
            if resp.getheader("Connection", "").lower() == "close":
                conn.close()
                conn = http.client.HTTPConnection(host, port, timeout=timeout)
    finally:
        conn.close()
    return results
