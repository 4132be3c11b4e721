"""Honeypot vetting: probe a shell honeypot for tells an attacker would use."""

from __future__ import annotations

import re
import secrets
import socket
from dataclasses import dataclass, field

from .clients import ShellClient, ShellClientError

_TELLS = ("cowrie", "kippo", "honeypot", "honeyshell", "svr04")
# "<cmd>: command not found" (shipped table) or ash style "sh: <cmd>: not found"
_UNKNOWN_SHAPE = re.compile(r"^(?:-?(?:sh|ash): )?(\S+): (?:command )?not found$")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VettingReport:
    target: str
    complete: bool
    checks: list[Check] = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.complete and all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "complete": self.complete,
            "passed": self.passed,
            "error": self.error,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def _check_banner(banner: str) -> Check:
    low = banner.lower()
    tells = [t for t in _TELLS if t in low]
    if tells:
        return Check("banner", False, f"banner mentions {', '.join(tells)}")
    if "busybox" not in low:
        return Check("banner", False, "banner does not look like a busybox device")
    return Check("banner", True, banner.strip().splitlines()[0] if banner.strip() else "")


def _check_file(out: str) -> Check:
    ok = "ELF" in out
    return Check("file_command", ok, out.strip()[:120] or "(empty response)")


def _check_uname(uname: str, file_out: str) -> Check:
    fields = uname.split()
    if len(fields) < 3 or fields[0] != "Linux" or not uname.rstrip().endswith("GNU/Linux"):
        return Check("uname_consistency", False, f"unexpected uname shape: {uname.strip()[:120]!r}")
    machine = fields[-2]
    if "ARM" in file_out and not machine.startswith("arm"):
        return Check("uname_consistency", False, f"busybox is ARM but uname machine is {machine}")
    if "x86-64" in file_out and machine != "x86_64":
        return Check("uname_consistency", False, f"busybox is x86-64 but uname machine is {machine}")
    return Check("uname_consistency", True, machine)


def _check_unknown(word: str, out: str) -> Check:
    m = _UNKNOWN_SHAPE.match(out.strip())
    ok = m is not None and m.group(1) == word
    return Check("unknown_command_error", ok, out.strip()[:120])


def _check_timing(latencies: list[float], limit: float) -> Check:
    if not latencies:
        return Check("timing", False, "no command latencies recorded")
    worst = max(latencies)
    return Check("timing", worst < limit, f"max latency {worst * 1000:.1f} ms")


def fingerprint_probe(
    host: str,
    port: int,
    credentials: tuple[str, str],
    timeout: float = 5.0,
    latency_limit: float = 2.0,
) -> VettingReport:
    """Log in and run the checklist. An unreachable target, a refused login
    or a dropped connection yields an incomplete report."""
    import time

    report = VettingReport(f"{host}:{port}", complete=False)
    try:
        with ShellClient(host, port, timeout) as client:
            banner = client.read_banner()
            report.checks.append(_check_banner(banner))
            if not client.login(*credentials):
                report.error = "login refused with the supplied credentials"
                return report
            latencies = []

            def run(cmd: str) -> str:
                start = time.monotonic()
                out = client.run(cmd)
                latencies.append(time.monotonic() - start)
                # drop the echoed command line if the server echoes
                first, _, rest = out.partition("\n")
                return rest if first.rstrip("\r") == cmd else out

            file_out = run("file /bin/busybox")
            report.checks.append(_check_file(file_out))
            report.checks.append(_check_uname(run("uname -a"), file_out))
            word = "x" + secrets.token_hex(4)
            report.checks.append(_check_unknown(word, run(word)))
            report.checks.append(_check_timing(latencies, latency_limit))
            client.exit()
    except (OSError, ShellClientError, socket.timeout) as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        return report
    report.complete = True
    return report
