"""Request handling for the D-Link style camera honeypot, independent of the
socket layer so it can be driven directly."""

from __future__ import annotations

import base64
import binascii
import hashlib
import html
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from ..events import Event, EventKind, format_ts, make_event, new_session_id, utcnow
from .media import STREAM_CONTENT_TYPE, make_frames, render_credentials_png, render_stream
from .signatures import HttpRequest, classify_request

MODELS = ("DCS-5020L", "DCS-5030L")
LEAK_PATH = "/config/getuser"
STREAM_PATH = "/video/mjpg.cgi"
SNAPSHOT_PATH = "/image/jpeg.cgi"
FIRMWARE_POST_PATH = "/setup/firmware.cgi"

# the six advertised admin pages
PAGES = {
    "/setup/password.htm": "password change",
    "/setup/network.htm": "network info",
    "/setup/adduser.htm": "add user",
    "/status.htm": "device status",
    "/video.htm": "stream",
    "/setup/firmware.htm": "firmware upload",
}
PAGE_ALIASES = {"/": "/status.htm", "/admin": "/status.htm", "/index.html": "/status.htm"}
PROTECTED_EXTRA = {STREAM_PATH, SNAPSHOT_PATH, FIRMWARE_POST_PATH, "/setup/password.cgi", "/setup/adduser.cgi"}

LOGGED_HEADERS = ("host", "user-agent", "referer", "cookie", "content-type", "content-length", "x-forwarded-for")
SOURCE_TAG_HEADER = "x-source-tag"


@dataclass
class CameraProfile:
    model: str = "DCS-5020L"
    port: int = 8080
    credentials: tuple[str, str] = ("admin", "Kp4!vd8Qe2zR")
    firmware: str = "v1.15.12"
    server_header: str = "alphapd/2.1.8"
    honeypot_id: str = "honeycamera"
    fps: float = 10.0
    frame_count: int = 20
    artifacts_dir: str = "artifacts"
    accept_source_tag: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        self.credentials = tuple(self.credentials)
        if len(self.credentials) != 2 or not self.credentials[1]:
            raise ValueError("credentials must be a (username, non-empty password) pair")

    @property
    def page_set(self) -> dict[str, str]:
        return dict(PAGES)

    @property
    def loop_seconds(self) -> float:
        return self.frame_count / self.fps if self.fps else 0.0


def load_credentials_file(path: str | os.PathLike) -> tuple[str, str]:
    """First non-comment line ``username:password``."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                user, sep, pwd = line.partition(":")
                if not sep:
                    raise ValueError(f"{path}: expected username:password")
                return user, pwd
    raise ValueError(f"{path}: no credentials found")


@dataclass
class Response:
    status: int
    body: bytes = b""
    headers: dict[str, str] = field(default_factory=dict)
    stream: Iterator[bytes] | None = None


@dataclass
class CameraSession:
    src_ip: str
    src_port: int
    session_id: str = field(default_factory=new_session_id)
    logged_in: bool = False


def _page(title: str, body: str, model: str) -> bytes:
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>D-Link {model} | {html.escape(title)}</title>"
        "<link rel=\"stylesheet\" href=\"/css/style.css\"></head><body>"
        f"<div id=\"header\"><img src=\"/images/dlink.gif\" alt=\"D-Link\"> <b>{model}</b></div>"
        "<div id=\"menu\">" + "".join(f"<a href=\"{p}\">{t.title()}</a> " for p, t in PAGES.items()) + "</div>"
        f"<div id=\"content\"><h2>{html.escape(title)}</h2>{body}</div></body></html>\n"
    ).encode("utf-8")


class CameraApp:
    def __init__(self, profile: CameraProfile, sink=None):
        self.profile = profile
        self.sink = sink
        self.frames = make_frames(profile.frame_count, label=profile.model)
        self.honeytoken_png = render_credentials_png(*profile.credentials)
        self._leak_hits: set[str] = set()
        self._lock = threading.Lock()

    # -- event plumbing --
    def _event(self, session: CameraSession, kind: EventKind, **payload) -> Event:
        ev = make_event(
            kind, src_ip=session.src_ip, src_port=session.src_port,
            honeypot_id=self.profile.honeypot_id, session_id=session.session_id, **payload,
        )
        if self.sink is not None:
            self.sink.append(ev)
        return ev

    def open_session(self, src_ip: str, src_port: int) -> tuple[CameraSession, Event]:
        session = CameraSession(src_ip, src_port)
        return session, self._event(session, EventKind.CONNECT, model=self.profile.model)

    def close_session(self, session: CameraSession, reason: str = "client_closed") -> Event:
        return self._event(session, EventKind.DISCONNECT, reason=reason)

    # -- auth --
    def _basic_auth(self, request: HttpRequest) -> tuple[str, str] | None:
        value = request.header("authorization")
        scheme, _, token = value.partition(" ")
        if scheme.lower() != "basic" or not token:
            return None
        try:
            user, _, pwd = base64.b64decode(token.strip(), validate=True).decode("utf-8", "replace").partition(":")
        except (binascii.Error, ValueError):
            return None
        return user, pwd

    def _login(self, session: CameraSession, user: str, pwd: str, events: list[Event], via: str) -> bool:
        ok = (user, pwd) == self.profile.credentials
        if not ok:
            events.append(self._event(session, EventKind.LOGIN_FAILURE, username=user, password=pwd, via=via))
            return False
        if not session.logged_in:
            session.logged_in = True
            with self._lock:
                saw_leak = session.src_ip in self._leak_hits
            flag = "human_suspect" if saw_leak else "credential_mystery"
            events.append(self._event(session, EventKind.LOGIN_SUCCESS, username=user, password=pwd,
                                      via=via, honeytoken=flag, **{flag: True}))
        return True

    def leak_seen(self, ip: str) -> bool:
        with self._lock:
            return ip in self._leak_hits

    # -- routing --
    def handle_request(self, request: HttpRequest, session: CameraSession) -> tuple[Response, list[Event]]:
        """Route one request. Every call logs exactly one http_request event
        carrying the signature label, after any login events it triggers."""
        events: list[Event] = []
        attack_type = classify_request(request)
        extra: dict = {}
        resp = self._route(request, session, events, extra)
        resp.headers.setdefault("Server", self.profile.server_header)
        payload = {
            "method": request.method,
            "path": request.path,
            "query": request.query,
            "headers": {h: request.headers[h] for h in LOGGED_HEADERS if h in request.headers},
            "status": resp.status,
            "attack_type": attack_type,
            **extra,
        }
        if request.method not in ("GET", "HEAD") and request.body:
            payload["body_sha256"] = hashlib.sha256(request.body).hexdigest()
            payload["body_length"] = len(request.body)
        events.append(self._event(session, EventKind.HTTP_REQUEST, **payload))
        return resp, events

    def bad_request(self, session: CameraSession, raw_line: str) -> tuple[Response, Event]:
        ev = self._event(session, EventKind.HTTP_REQUEST, method="INVALID", path="", query="",
                         headers={}, status=400, attack_type=None, raw_line=raw_line[:512])
        return Response(400, b"<html><body><h1>400 Bad Request</h1></body></html>\n",
                        {"Content-Type": "text/html", "Server": self.profile.server_header}), ev

    def _unauthorized(self) -> Response:
        return Response(
            401,
            b"<html><body><h1>401 Unauthorized</h1></body></html>\n",
            {"WWW-Authenticate": f'Basic realm="{self.profile.model}"', "Content-Type": "text/html"},
        )

    def _html(self, title: str, body: str, status: int = 200) -> Response:
        return Response(status, _page(title, body, self.profile.model), {"Content-Type": "text/html"})

    def _route(self, req: HttpRequest, session: CameraSession, events: list[Event], extra: dict) -> Response:
        path = req.path
        path = PAGE_ALIASES.get(path, path)

        if path == LEAK_PATH:
            with self._lock:
                self._leak_hits.add(session.src_ip)
            extra["honeytoken_served"] = True
            return self.honeytoken_page()

        if _is_snapshot_probe(req):
            params = _loose_params(req.target)
            if self._login(session, params.get("user", ""), params.get("pwd", ""), events, via="snapshot.cgi"):
                return Response(200, self.frames[0], {"Content-Type": "image/jpeg"})
            return self._unauthorized()

        if path.endswith("/device.rsp"):
            if "uid=" not in req.header("cookie"):
                return self._unauthorized()
            # the bypass answers with a decoy account list, never the real pair
            users = {"result": 0, "list": [
                {"uid": "admin", "pwd": "admin123", "role": 2},
                {"uid": "guest", "pwd": "guest", "role": 1},
            ]}
            return Response(200, json.dumps(users).encode(), {"Content-Type": "application/json"})

        protected = path in PAGES or path in PROTECTED_EXTRA
        if not protected:
            return self._html("Not Found", "<p>The requested URL was not found.</p>", 404)

        creds = self._basic_auth(req)
        if creds is None or not self._login(session, creds[0], creds[1], events, via="basic"):
            return self._unauthorized()

        if path == STREAM_PATH:
            return Response(200, b"", {"Content-Type": STREAM_CONTENT_TYPE, "Cache-Control": "no-cache"},
                            stream=render_stream(self.frames))
        if path == SNAPSHOT_PATH:
            return Response(200, self.frames[0], {"Content-Type": "image/jpeg"})
        if path == FIRMWARE_POST_PATH and req.method == "POST":
            sha = self.store_firmware(req, session)
            extra["artifact_sha256"] = sha
            return self._html("Firmware Upgrade", "<p>Firmware upgrade successful. The device will reboot "
                              "in 60 seconds.</p>")
        if path in ("/setup/password.cgi", "/setup/adduser.cgi"):
            return self._html("Setup", "<p>Settings saved successfully.</p>")
        return self.page(path)

    def page(self, path: str) -> Response:
        p = self.profile
        bodies = {
            "/status.htm": (
                f"<table><tr><td>Model</td><td>{p.model}</td></tr>"
                f"<tr><td>Firmware Version</td><td>{p.firmware}</td></tr>"
                "<tr><td>MAC Address</td><td>B0:C5:54:1A:2F:08</td></tr>"
                "<tr><td>Uptime</td><td>12 Day 3:14:27</td></tr>"
                "<tr><td>Wireless</td><td>Connected</td></tr></table>"
            ),
            "/setup/network.htm": (
                "<table><tr><td>Connection Type</td><td>DHCP</td></tr>"
                "<tr><td>IP Address</td><td>192.168.0.20</td></tr>"
                "<tr><td>Subnet Mask</td><td>255.255.255.0</td></tr>"
                "<tr><td>Default Gateway</td><td>192.168.0.1</td></tr>"
                "<tr><td>HTTP Port</td><td>80</td></tr></table>"
            ),
            "/setup/password.htm": (
                "<form method=\"post\" action=\"/setup/password.cgi\">"
                "Old Password <input type=\"password\" name=\"oldpwd\"><br>"
                "New Password <input type=\"password\" name=\"newpwd\"><br>"
                "Confirm <input type=\"password\" name=\"confirm\"><br>"
                "<input type=\"submit\" value=\"Save Settings\"></form>"
            ),
            "/setup/adduser.htm": (
                "<form method=\"post\" action=\"/setup/adduser.cgi\">"
                "User Name <input name=\"user\"><br>Password <input type=\"password\" name=\"pwd\"><br>"
                "<input type=\"submit\" value=\"Add\"></form>"
            ),
            "/video.htm": f"<img src=\"{STREAM_PATH}\" width=\"640\" height=\"480\" alt=\"Live Video\">",
            "/setup/firmware.htm": (
                f"<p>Current firmware: {p.firmware}</p>"
                f"<form method=\"post\" action=\"{FIRMWARE_POST_PATH}\" enctype=\"multipart/form-data\">"
                "<input type=\"file\" name=\"firmware\"><input type=\"submit\" value=\"Upload\"></form>"
            ),
        }
        return self._html(PAGES[path].title(), bodies[path])

    def honeytoken_page(self) -> Response:
        img = base64.b64encode(self.honeytoken_png).decode("ascii")
        body = (
            "<p>Account information</p>"
            f"<img src=\"data:image/png;base64,{img}\" alt=\"account\">"
        )
        return self._html("User Configuration", body)

    def store_firmware(self, req: HttpRequest, session: CameraSession) -> str:
        sha = hashlib.sha256(req.body).hexdigest()
        root = Path(self.profile.artifacts_dir)
        root.mkdir(parents=True, exist_ok=True)
        (root / f"{sha}.bin").write_bytes(req.body)
        meta = {
            "sha256": sha,
            "size": len(req.body),
            "src_ip": session.src_ip,
            "session": session.session_id,
            "content_type": req.header("content-type"),
            "received": format_ts(utcnow()),
        }
        (root / f"{sha}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return sha


def _is_snapshot_probe(req: HttpRequest) -> bool:
    return "snapshot.cgi" in req.target and "user=" in req.target


def _loose_params(target: str) -> dict[str, str]:
    """Key/value pairs split on '?' and '&' anywhere in the target; the
    brute-force URLs nest a second '?' inside the query."""
    out: dict[str, str] = {}
    for chunk in target.replace("?", "&").split("&"):
        key, sep, value = chunk.partition("=")
        if sep and key not in out:
            out[key] = value
    return out
