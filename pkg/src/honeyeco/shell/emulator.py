"""Command emulation for the fake busybox shell."""

from __future__ import annotations

import hashlib
import posixpath
import re
from dataclasses import dataclass, field
from string import Template
from urllib.parse import urlsplit

from ..events import Event, EventKind, make_event, new_session_id
from .config import ShellConfig

_SPLIT = re.compile(r"\s*(?:;|&&)\s*")
_DOWNLOADERS = ("wget", "curl")
# options whose value is the following token
_VALUE_OPTS = {
    "wget": {"-O", "-P", "-U", "-o", "-e", "-T", "-t", "--header", "--user-agent", "--output-document"},
    "curl": {"-o", "-A", "-H", "-d", "-u", "-x", "-e", "-X", "-m", "--output", "--user-agent",
             "--header", "--data", "--max-time", "--connect-timeout", "--retry"},
}


@dataclass
class ShellSession:
    src_ip: str
    src_port: int
    session_id: str = field(default_factory=new_session_id)
    authenticated: bool = False
    username: str = ""
    cwd: str = "/"
    env: dict[str, str] = field(default_factory=dict)


def authenticate(credential: tuple[str, str], config: ShellConfig) -> bool:
    """Phase 1 accepts anything, phase 2 the allowlist, phase 3 one pair."""
    pair = (credential[0], credential[1])
    if config.phase == 1:
        return True
    if config.phase == 2:
        return pair in set(config.allowlist)
    return pair == tuple(config.single_credential)


def split_composite(command: str) -> list[str]:
    """Split on ';' and '&&' only; pipelines stay whole."""
    parts = []
    for part in _SPLIT.split(command.strip()):
        part = part.strip()
        if part.endswith(" &") or part == "&":
            part = part[:-1].strip()
        if part:
            parts.append(part)
    return parts


@dataclass
class Download:
    url: str
    tool: str
    parse_failed: bool
    shasum: str


def parse_download(command: str) -> Download | None:
    """Extract the URL from a wget/curl invocation; ``None`` if the command
    is not a downloader call. The hash is a placeholder derived from the URL
    because nothing is ever fetched."""
    tokens = command.split()
    if not tokens:
        return None
    tool = posixpath.basename(tokens[0])
    if tokens[0] in ("/bin/busybox", "busybox") and len(tokens) > 1:
        tool = tokens[1]
        tokens = tokens[1:]
    if tool not in _DOWNLOADERS:
        return None
    url = None
    skip = False
    for tok in tokens[1:]:
        if skip:
            skip = False
            continue
        if tok in _VALUE_OPTS[tool]:
            skip = True
            continue
        if tok.startswith("-"):
            continue
        candidate = tok if "://" in tok else "http://" + tok
        parts = urlsplit(candidate)
        if parts.scheme in ("http", "https", "ftp", "tftp") and parts.netloc:
            url = candidate
            break
    if url is None:
        return Download(url=command, tool=tool, parse_failed=True, shasum="")
    return Download(url=url, tool=tool, parse_failed=False, shasum=hashlib.sha256(url.encode()).hexdigest())


def _transfer_text(dl: Download) -> str:
    if dl.parse_failed:
        return f"BusyBox {dl.tool}: missing URL\nUsage: {dl.tool} [OPTIONS] URL"
    if dl.tool == "curl":
        return ""
    parts = urlsplit(dl.url)
    host = parts.netloc if ":" in parts.netloc else f"{parts.netloc}:80"
    name = posixpath.basename(parts.path) or "index.html"
    size = int(dl.shasum[:4], 16) % 90000 + 1024
    return (
        f"Connecting to {host} ({host})\n"
        f"{name:<20} 100% |*******************************| {size:>6}  0:00:00 ETA"
    )


class HoneyShell:
    """Stateless emulation engine; all per-connection state is in
    :class:`ShellSession`. Events go to ``sink`` as they happen."""

    def __init__(self, config: ShellConfig, sink=None):
        self.config = config
        self.sink = sink

    def _event(self, session: ShellSession, kind: EventKind, **payload) -> Event:
        ev = make_event(
            kind,
            src_ip=session.src_ip,
            src_port=session.src_port,
            honeypot_id=self.config.honeypot_id,
            session_id=session.session_id,
            **payload,
        )
        if self.sink is not None:
            self.sink.append(ev)
        return ev

    def connect(self, session: ShellSession) -> Event:
        return self._event(session, EventKind.CONNECT, phase=self.config.phase)

    def disconnect(self, session: ShellSession, reason: str) -> Event:
        return self._event(session, EventKind.DISCONNECT, reason=reason)

    def login(self, session: ShellSession, username: str, password: str) -> bool:
        ok = authenticate((username, password), self.config)
        kind = EventKind.LOGIN_SUCCESS if ok else EventKind.LOGIN_FAILURE
        self._event(session, kind, username=username, password=password)
        if ok:
            session.authenticated = True
            session.username = username or "root"
        return ok

    def execute(self, line: str, session: ShellSession) -> tuple[str, Event]:
        if not session.authenticated:
            raise PermissionError("command execution before successful login")
        cmd_event = self._event(session, EventKind.COMMAND, input=line)
        outputs = []
        for sub in split_composite(line):
            out = self._run_one(sub, session)
            if out:
                outputs.append(out if out.endswith("\n") else out + "\n")
        return "".join(outputs), cmd_event

    def capture_download(self, command: str, session: ShellSession) -> tuple[str, Event]:
        dl = parse_download(command)
        if dl is None:
            raise ValueError(f"not a wget/curl command: {command!r}")
        payload = {"url": dl.url, "tool": dl.tool, "shasum": dl.shasum, "placeholder_hash": True}
        if dl.parse_failed:
            payload["url_parse_failed"] = True
        ev = self._event(session, EventKind.DOWNLOAD_ATTEMPT, **payload)
        return _transfer_text(dl), ev

    def _render(self, template: str, session: ShellSession, match: re.Match | None = None) -> str:
        ctx = self.config.context(session.username or "root", session.cwd)
        if match is not None:
            ctx["g0"] = match.group(0)
            for i, g in enumerate(match.groups(), 1):
                ctx[f"g{i}"] = g or ""
        return Template(template).safe_substitute(ctx)

    def _resolve(self, session: ShellSession, path: str) -> str:
        return posixpath.normpath(posixpath.join(session.cwd, path)) if path else session.cwd

    def _run_one(self, command: str, session: ShellSession) -> str:
        tokens = command.split()
        head = tokens[0]
        fs = self.config.fs_snapshot

        if parse_download(command) is not None:
            return self.capture_download(command, session)[0]
        if head == "cd":
            target = self._resolve(session, tokens[1] if len(tokens) > 1 else "/root")
            if fs.get(target, {}).get("type") != "dir":
                return f"sh: cd: can't cd to {tokens[1]}"
            session.cwd = target
            return ""
        if head == "pwd":
            return session.cwd
        if head == "echo" and ">" not in tokens and "|" not in tokens:
            return self._render(" ".join(tokens[1:]).replace('"', "").replace("'", ""), session)
        if head == "echo":
            return ""
        if head == "cat" and len(tokens) == 2:
            node = fs.get(self._resolve(session, tokens[1]))
            if node is not None:
                if node.get("type") == "dir":
                    return "cat: read error: Is a directory"
                return self._render(node.get("content", ""), session).rstrip("\n")
        operands = [t for t in tokens[1:] if not t.startswith("-")]
        if head == "ls" and len(operands) <= 1:
            target = self._resolve(session, operands[0] if operands else "")
            if fs.get(target, {}).get("type") == "dir":
                prefix = target.rstrip("/") + "/"
                names = sorted(
                    p[len(prefix):] for p in fs if p.startswith(prefix) and p != target and "/" not in p[len(prefix):]
                )
                return "  ".join(names)
        for entry in self.config.command_table:
            m = entry.match(command)
            if m is not None:
                return self._render(entry.response, session, m)
        return f"{head}: command not found"
