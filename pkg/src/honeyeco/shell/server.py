"""Plaintext telnet-style listener for the fake shell."""

from __future__ import annotations

import ipaddress
import logging
import select
import socket
import socketserver
import threading

from .config import ShellConfig
from .emulator import HoneyShell, ShellSession

log = logging.getLogger(__name__)

MAX_LINE = 4096
SOURCE_TAG_PREFIX = "#srctag "
# how long a test-mode server waits for a source tag before the banner
SOURCE_TAG_WAIT = 0.5
_EXIT_COMMANDS = {"exit", "logout", "quit"}


def _strip_telnet(raw: bytes) -> str:
    """Drop IAC negotiation sequences and line terminators."""
    out = bytearray()
    i = 0
    while i < len(raw):
        b = raw[i]
        if b == 0xFF and i + 1 < len(raw):
            i += 3 if raw[i + 1] in (0xFB, 0xFC, 0xFD, 0xFE) else 2
            continue
        out.append(b)
        i += 1
    return out.decode("utf-8", errors="replace").rstrip("\r\n").replace("\r", "").replace("\x00", "")


def parse_source_tag(line: str) -> str | None:
    if not line.startswith(SOURCE_TAG_PREFIX):
        return None
    candidate = line[len(SOURCE_TAG_PREFIX):].strip()
    try:
        return str(ipaddress.ip_address(candidate))
    except ValueError:
        return None


class _ConnectionClosed(Exception):
    pass


class ShellHandler(socketserver.StreamRequestHandler):
    server: "ShellServer"

    def _send(self, text: str) -> None:
        self.wfile.write(text.replace("\n", "\r\n").encode("utf-8"))
        self.wfile.flush()

    def _readline(self) -> str:
        raw = self.rfile.readline(MAX_LINE)
        if not raw:
            raise _ConnectionClosed()
        return _strip_telnet(raw)

    def _read_source_tag(self, sock: socket.socket) -> tuple[str | None, str | None]:
        """In test mode, consume an optional leading source-tag line.
        Returns (tag ip, pending first line that was not a tag). A timed-out
        socket file refuses further reads, so the wait uses select."""
        ready, _, _ = select.select([sock], [], [], SOURCE_TAG_WAIT)
        if not ready:
            return None, None
        line = self._readline()
        tag = parse_source_tag(line)
        return (tag, None) if tag else (None, line)

    def handle(self) -> None:
        cfg = self.server.config
        shell = self.server.shell
        sock: socket.socket = self.request
        sock.settimeout(cfg.idle_timeout)
        src_ip, src_port = self.client_address[0], self.client_address[1]
        pending: str | None = None
        try:
            if cfg.accept_source_tag:
                tag, pending = self._read_source_tag(sock)
                src_ip = tag or src_ip
        except (_ConnectionClosed, OSError):
            return

        session = ShellSession(src_ip=src_ip, src_port=src_port)
        shell.connect(session)
        reason = "client_closed"
        try:
            self._send(f"\n{cfg.banner}\n\n")
            for _ in range(cfg.max_login_attempts):
                self._send(f"{cfg.hostname} login: ")
                user = pending if pending is not None else self._readline()
                pending = None
                self._send("Password: ")
                password = self._readline()
                if shell.login(session, user, password):
                    break
                self._send("\nLogin incorrect\n")
            if not session.authenticated:
                reason = "login_failed"
                return
            self._send(f"\n\n{cfg.banner}\nEnter 'help' for a list of built-in commands.\n\n")
            while True:
                self._send(f"{session.username}@{cfg.hostname}:{session.cwd}# ")
                line = self._readline().strip()
                if not line:
                    continue
                if line in _EXIT_COMMANDS:
                    reason = "exit"
                    return
                output, _ = shell.execute(line, session)
                if output:
                    self._send(output)
        except (socket.timeout, TimeoutError):
            reason = "idle_timeout"
        except _ConnectionClosed:
            reason = "client_closed"
        except OSError as exc:
            reason = f"io_error: {exc.__class__.__name__}"
        finally:
            shell.disconnect(session, reason)


class ShellServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True
    block_on_close = False

    def __init__(self, address: tuple[str, int], config: ShellConfig, sink):
        self.config = config
        self.shell = HoneyShell(config, sink)
        super().__init__(address, ShellHandler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        t = threading.Thread(target=self.serve_forever, name="honeyshell", daemon=True)
        t.start()
        return t


def serve(config: ShellConfig, address: tuple[str, int], sink) -> None:
    """Run the accept loop until interrupted; bind errors propagate."""
    with ShellServer(address, config, sink) as server:
        log.info("honeyshell phase %d listening on %s:%d", config.phase, *server.server_address[:2])
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            sink.close()
