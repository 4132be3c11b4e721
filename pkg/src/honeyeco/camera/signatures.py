"""Camera attack signatures.

Only the snapshot.cgi brute force and the CVE-2018-9995 cookie bypass come
with observed request shapes; the other matchers follow public exploit
write-ups for the named products and are approximate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import parse_qsl, unquote, urlsplit


@dataclass(frozen=True)
class HttpRequest:
    method: str
    target: str
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""
    src_ip: str = "0.0.0.0"
    src_port: int = 0

    @classmethod
    def build(cls, method: str, target: str, headers: dict[str, str] | None = None,
              body: bytes = b"", src_ip: str = "0.0.0.0", src_port: int = 0) -> "HttpRequest":
        hdrs = {k.lower(): v for k, v in (headers or {}).items()}
        return cls(method.upper(), target, hdrs, body, src_ip, src_port)

    @property
    def path(self) -> str:
        return unquote(self._split()[0]) or "/"

    @property
    def query(self) -> str:
        return self._split()[1]

    def _split(self) -> tuple[str, str]:
        # origin-form targets ("//etc/x") must not be read as a netloc
        if self.target.startswith("/"):
            path, _, rest = self.target.partition("?")
            return path, rest.partition("#")[0]
        parts = urlsplit(self.target)
        return parts.path, parts.query

    @property
    def params(self) -> list[tuple[str, str]]:
        return parse_qsl(self.query, keep_blank_values=True)

    def header(self, name: str) -> str:
        return self.headers.get(name.lower(), "")


@dataclass(frozen=True)
class AttackSignature:
    name: str
    attack_type: str
    matcher: Callable[[HttpRequest], bool]


def _snapshot_bruteforce(r: HttpRequest) -> bool:
    return "snapshot.cgi" in r.target and "user=" in r.target


def _cve_2018_9995(r: HttpRequest) -> bool:
    cookie = r.header("cookie").replace(" ", "")
    return bool(re.search(r"(^|;)uid=admin(;|$)", cookie)) or (
        r.path.endswith("/device.rsp") and "uid=" in cookie
    )


def _shellshock(r: HttpRequest) -> bool:
    return any("() {" in v for v in r.headers.values())


def _dlink_rtpd(r: HttpRequest) -> bool:
    return r.path.startswith("/cgi-bin/rtpd.cgi")


def _hikvision_bypass(r: HttpRequest) -> bool:
    return "auth=YWRtaW46MTEK" in r.target or (
        r.path.startswith(("/Security/users", "/onvif-http/snapshot", "/System/configurationFile"))
        and "auth=" in r.query
    )


def _netwave_disclosure(r: HttpRequest) -> bool:
    p = r.path.lstrip("/")
    return p in ("etc/RT2870STA.dat", "proc/kcore", "get_status.cgi") or p.startswith("etc/RT2870STA")


def _foscam_bypass(r: HttpRequest) -> bool:
    if not r.path.endswith(("CGIProxy.fcgi", "videostream.cgi", "get_params.cgi", "decoder_control.cgi")):
        return False
    params = dict(r.params)
    user = params.get("usr", params.get("user"))
    pwd = params.get("pwd", None)
    return user is not None and (pwd is None or pwd == "")


def _aivi_injection(r: HttpRequest) -> bool:
    return r.path.startswith("/cgi-bin/supervisor/") or "queryb64str" in r.query


_METACHARS = (";", "|", "`", "$(", "&&", "${")
_INJECT_WORDS = re.compile(r"\b(wget|curl|tftp|busybox|/bin/sh|nc)\b")


def _query_injection(r: HttpRequest) -> bool:
    for _, value in r.params:
        v = unquote(value)
        if any(m in v for m in _METACHARS) or _INJECT_WORDS.search(v):
            return True
    return False


# priority order: first match wins
SIGNATURES: tuple[AttackSignature, ...] = (
    AttackSignature("snapshot-bruteforce", "camera credential brute-force", _snapshot_bruteforce),
    AttackSignature("cve-2018-9995", "CVE-2018-9995 bypass", _cve_2018_9995),
    AttackSignature("shellshock", "IP Camera - Shellshock", _shellshock),
    AttackSignature("cve-2013-1599", "[CVE-2013-1599] DLINK Camera", _dlink_rtpd),
    AttackSignature("hikvision-bypass", "Hikvision IP Camera - Bypass Authentication", _hikvision_bypass),
    AttackSignature("netwave-disclosure", "Netwave IP Camera - Password Disclosure", _netwave_disclosure),
    AttackSignature("foscam-bypass", "Foscam IP Camera - Bypass Authentication", _foscam_bypass),
    AttackSignature("aivi-injection", "AIVI Tech Camera - command injection", _aivi_injection),
    AttackSignature("query-injection", "Malicious Activity", _query_injection),
)


def classify_request(request: HttpRequest, signatures=SIGNATURES) -> str | None:
    for sig in signatures:
        if sig.matcher(request):
            return sig.attack_type
    return None
