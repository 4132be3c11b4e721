"""Event model, JSON-lines event log, Cowrie ingestion and sessionization."""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

log = logging.getLogger(__name__)


class EventKind(str, Enum):
    CONNECT = "connect"
    LOGIN_ATTEMPT = "login_attempt"
    LOGIN_SUCCESS = "login_success"
    LOGIN_FAILURE = "login_failure"
    COMMAND = "command"
    HTTP_REQUEST = "http_request"
    DOWNLOAD_ATTEMPT = "download_attempt"
    DISCONNECT = "disconnect"


CREDENTIAL_KINDS = frozenset(
    {EventKind.LOGIN_ATTEMPT, EventKind.LOGIN_SUCCESS, EventKind.LOGIN_FAILURE}
)

REQUIRED_PAYLOAD = {
    EventKind.COMMAND: ("input",),
    EventKind.LOGIN_ATTEMPT: ("username", "password"),
    EventKind.LOGIN_SUCCESS: ("username", "password"),
    EventKind.LOGIN_FAILURE: ("username", "password"),
    EventKind.HTTP_REQUEST: ("method", "path"),
    EventKind.DOWNLOAD_ATTEMPT: ("url",),
}

# Cowrie eventid -> kind. Everything in COWRIE_IGNORED is a known eventid that
# carries nothing the pipeline uses; it is skipped but counted as explained.
COWRIE_EVENT_MAP = {
    "cowrie.session.connect": EventKind.CONNECT,
    "cowrie.login.success": EventKind.LOGIN_SUCCESS,
    "cowrie.login.failed": EventKind.LOGIN_FAILURE,
    "cowrie.command.input": EventKind.COMMAND,
    "cowrie.session.file_download": EventKind.DOWNLOAD_ATTEMPT,
    "cowrie.session.closed": EventKind.DISCONNECT,
}
COWRIE_IGNORED = frozenset(
    {
        "cowrie.command.failed",
        "cowrie.command.success",
        "cowrie.client.version",
        "cowrie.client.kex",
        "cowrie.client.size",
        "cowrie.client.var",
        "cowrie.session.params",
        "cowrie.log.closed",
        "cowrie.direct-tcpip.request",
        "cowrie.direct-tcpip.data",
        "cowrie.session.file_download.failed",
        "cowrie.session.file_upload",
    }
)


class EventValidationError(ValueError):
    pass


class LogFormatError(ValueError):
    """Raised by strict-mode loading on the first unusable line."""

    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


def utcnow() -> datetime:
    return truncate_ms(datetime.now(timezone.utc))


def truncate_ms(ts: datetime) -> datetime:
    return ts.replace(microsecond=ts.microsecond - ts.microsecond % 1000)


def format_ts(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def parse_ts(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return truncate_ms(ts.astimezone(timezone.utc))


def new_session_id() -> str:
    return secrets.token_hex(16)


@dataclass(frozen=True)
class Event:
    timestamp: datetime
    src_ip: str
    src_port: int
    honeypot_id: str
    session_id: str
    kind: EventKind
    payload: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if not isinstance(self.kind, EventKind):
            raise EventValidationError(f"unknown kind {self.kind!r}")
        if not 0 <= int(self.src_port) <= 65535:
            raise EventValidationError(f"src_port out of range: {self.src_port}")
        if not self.src_ip:
            raise EventValidationError("src_ip is empty")
        if not self.session_id:
            raise EventValidationError("session id is empty")
        if self.timestamp.tzinfo is None:
            raise EventValidationError("timestamp must be timezone-aware")
        missing = [k for k in REQUIRED_PAYLOAD.get(self.kind, ()) if k not in self.payload]
        if missing:
            raise EventValidationError(
                f"{self.kind.value} event missing payload key(s): {', '.join(missing)}"
            )

    def to_record(self) -> dict[str, Any]:
        return {
            "ts": format_ts(self.timestamp),
            "src_ip": self.src_ip,
            "src_port": self.src_port,
            "honeypot_id": self.honeypot_id,
            "session": self.session_id,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "Event":
        try:
            kind = EventKind(rec["kind"])
        except ValueError:
            raise EventValidationError(f"unknown kind {rec['kind']!r}") from None
        ev = cls(
            timestamp=parse_ts(rec["ts"]),
            src_ip=str(rec["src_ip"]),
            src_port=int(rec["src_port"]),
            honeypot_id=str(rec["honeypot_id"]),
            session_id=str(rec["session"]),
            kind=kind,
            payload=dict(rec.get("payload") or {}),
        )
        ev.validate()
        return ev


def make_event(
    kind: EventKind,
    *,
    src_ip: str,
    src_port: int,
    honeypot_id: str,
    session_id: str,
    timestamp: datetime | None = None,
    **payload: Any,
) -> Event:
    return Event(
        timestamp=truncate_ms(timestamp) if timestamp else utcnow(),
        src_ip=src_ip,
        src_port=src_port,
        honeypot_id=honeypot_id,
        session_id=session_id,
        kind=kind,
        payload=payload,
    )


class EventSink:
    """Append-only JSON-lines log shared by every connection handler.

    Each record is serialized first and written with a single ``write`` under
    the lock, so concurrent appends never interleave partial lines.
    """

    def __init__(self, path: str | os.PathLike, fsync: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._lock = threading.Lock()
        self._fh = open(self.path, "a", encoding="utf-8")
        self.count = 0

    def append(self, event: Event) -> int:
        """Validate and append one event; returns the running append count."""
        event.validate()
        line = json.dumps(event.to_record(), ensure_ascii=False, separators=(",", ":")) + "\n"
        with self._lock:
            if self._fh.closed:
                raise OSError(f"event sink {self.path} is closed")
            self._fh.write(line)
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
            self.count += 1
            return self.count

    def close(self) -> None:
        with self._lock:
            if not self._fh.closed:
                self._fh.flush()
                self._fh.close()

    def __enter__(self) -> "EventSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class MemorySink:
    """In-process sink with the same contract; used by tests and dry runs."""

    def __init__(self):
        self.events: list[Event] = []
        self._lock = threading.Lock()

    def append(self, event: Event) -> int:
        event.validate()
        with self._lock:
            self.events.append(event)
            return len(self.events)

    def close(self) -> None:
        pass


def append_event(sink: EventSink | MemorySink, event: Event) -> int:
    return sink.append(event)


@dataclass
class LoadResult:
    events: list[Event]
    skipped: int = 0
    reasons: Counter = field(default_factory=Counter)

    @property
    def unexplained(self) -> int:
        return self.reasons.get("malformed", 0) + self.reasons.get("invalid", 0)


def _cowrie_event(rec: Mapping[str, Any]) -> Event:
    kind = COWRIE_EVENT_MAP[rec["eventid"]]
    payload: dict[str, Any] = {}
    if kind is EventKind.COMMAND:
        payload["input"] = rec["input"]
    elif kind in CREDENTIAL_KINDS:
        payload["username"] = rec.get("username", "")
        payload["password"] = rec.get("password", "")
    elif kind is EventKind.DOWNLOAD_ATTEMPT:
        payload["url"] = rec["url"]
        for key in ("shasum", "outfile"):
            if key in rec:
                payload[key] = rec[key]
    elif kind is EventKind.CONNECT and "dst_port" in rec:
        payload["dst_port"] = rec["dst_port"]
    ev = Event(
        timestamp=parse_ts(rec["timestamp"]),
        src_ip=str(rec["src_ip"]),
        src_port=int(rec.get("src_port", 0)),
        honeypot_id=str(rec.get("sensor", "cowrie")),
        session_id=str(rec["session"]),
        kind=kind,
        payload=payload,
    )
    ev.validate()
    return ev


def load_events(path: str | os.PathLike, dialect: str = "native", strict: bool = False) -> LoadResult:
    """Parse a JSON-lines log.

    Lenient mode skips torn or invalid lines and counts them by reason;
    strict mode raises :class:`LogFormatError` on the first one. Unknown
    Cowrie eventids are skipped in both modes.
    """
    if dialect not in ("native", "cowrie"):
        raise ValueError(f"unknown dialect {dialect!r}")
    result = LoadResult(events=[])
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
            except ValueError as exc:
                if strict:
                    raise LogFormatError(lineno, f"malformed JSON ({exc})") from None
                result.skipped += 1
                result.reasons["malformed"] += 1
                continue

            if dialect == "cowrie":
                eventid = rec.get("eventid")
                if eventid not in COWRIE_EVENT_MAP:
                    result.skipped += 1
                    reason = "ignored_eventid" if eventid in COWRIE_IGNORED else "unknown_eventid"
                    result.reasons[reason] += 1
                    continue
            try:
                ev = _cowrie_event(rec) if dialect == "cowrie" else Event.from_record(rec)
            except (KeyError, ValueError, TypeError) as exc:
                if strict:
                    raise LogFormatError(lineno, f"invalid event ({exc})") from None
                result.skipped += 1
                result.reasons["invalid"] += 1
                continue
            result.events.append(ev)
    if result.skipped:
        log.info("loaded %d events from %s, skipped %d (%s)", len(result.events), path,
                 result.skipped, dict(result.reasons))
    return result


@dataclass
class Session:
    session_id: str
    actor: str
    events: list[Event]
    truncated: bool = False

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    @property
    def end(self) -> datetime:
        return self.events[-1].timestamp

    @property
    def commands(self) -> list[str]:
        return [e.payload["input"] for e in self.events if e.kind is EventKind.COMMAND]

    @property
    def honeypot_id(self) -> str:
        return self.events[0].honeypot_id


def sessionize(events: Iterable[Event]) -> list[Session]:
    """Partition events by session id; sessions come out in first-seen order.

    Sorting within a session is stable on timestamp, so equal timestamps keep
    log order. A session is truncated when it does not open with a connect or
    close with a disconnect.
    """
    buckets: dict[str, list[Event]] = {}
    for ev in events:
        buckets.setdefault(ev.session_id, []).append(ev)
    sessions = []
    for sid, evs in buckets.items():
        evs.sort(key=lambda e: e.timestamp)
        truncated = evs[0].kind is not EventKind.CONNECT or evs[-1].kind is not EventKind.DISCONNECT
        sessions.append(Session(session_id=sid, actor=evs[0].src_ip, events=evs, truncated=truncated))
    return sessions


@dataclass
class Actor:
    ip: str
    sessions: list[str] = field(default_factory=list)
    commands: list[str] = field(default_factory=list)


def build_actor_index(sessions: Iterable[Session]) -> dict[str, Actor]:
    index: dict[str, Actor] = {}
    for s in sessions:
        actor = index.setdefault(s.actor, Actor(ip=s.actor))
        actor.sessions.append(s.session_id)
        actor.commands.extend(s.commands)
    return index


def load_enrichment(path: str | os.PathLike | None) -> dict[str, str]:
    """Read the offline reputation stub: JSON object ``{ip: label}`` or
    ``{ip: {"reputation_label": label}}``. Missing path means no enrichment."""
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    out = {}
    for ip, value in raw.items():
        out[ip] = value.get("reputation_label", "unknown") if isinstance(value, dict) else str(value)
    return out
