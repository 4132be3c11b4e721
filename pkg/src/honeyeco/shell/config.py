"""HoneyShell configuration: authentication phase, persona, command table."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

# Published top username/password combinations, most frequent first.
PUBLISHED_TOP_CREDENTIALS = [
    ("admin", "1234"),
    ("root", ""),
    ("admin", ""),
    ("0", ""),
    ("", "root"),
    ("1234", "1234"),
    ("admin", "admin"),
    ("admin", "1234567890"),
    ("root", "admin"),
]

# Filler to reach 30 pairs: common embedded-device defaults plus the
# organization-themed guesses seen against the university deployment.
FILLER_CREDENTIALS = [
    ("root", "xc3511"),
    ("root", "vizxv"),
    ("root", "888888"),
    ("root", "default"),
    ("root", "12345"),
    ("root", "123456"),
    ("root", "54321"),
    ("root", "hi3518"),
    ("root", "Zte521"),
    ("root", "7ujMko0admin"),
    ("root", "dreambox"),
    ("root", "user"),
    ("admin", "password"),
    ("admin", "admin1234"),
    ("admin", "smcadmin"),
    ("support", "support"),
    ("user", "user"),
    ("guest", "12345"),
    ("university", "florida"),
    ("root", "university"),
    ("university", "student"),
]

DEFAULT_ALLOWLIST = PUBLISHED_TOP_CREDENTIALS + FILLER_CREDENTIALS
DEFAULT_SINGLE_CREDENTIAL = ("admin", "Vq7#rT2!mK9xLp4$Zw")


@dataclass(frozen=True)
class CommandEntry:
    pattern: str
    response: str

    def __post_init__(self):
        object.__setattr__(self, "_regex", re.compile(self.pattern))

    def match(self, command: str) -> re.Match | None:
        return self._regex.fullmatch(command)


def _load_data(name: str) -> Any:
    return json.loads(resources.files("honeyeco.data").joinpath(name).read_text("utf-8"))


def default_command_table() -> list[CommandEntry]:
    return [CommandEntry(e["pattern"], e["response"]) for e in _load_data("shell_commands.json")]


def default_fs() -> dict[str, dict]:
    return _load_data("shell_fs.json")


@dataclass
class ShellConfig:
    phase: int = 2
    allowlist: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_ALLOWLIST))
    single_credential: tuple[str, str] = DEFAULT_SINGLE_CREDENTIAL
    hostname: str = "dlink-cam"
    banner: str = "BusyBox v1.19.4 (2019-03-05 18:06:51 CST) built-in shell (ash)"
    command_table: list[CommandEntry] = field(default_factory=default_command_table)
    fs_snapshot: dict[str, dict] = field(default_factory=default_fs)
    honeypot_id: str = "honeyshell"
    arch: str = "armv7l"
    kernel: str = "3.10.14"
    busybox_version: str = "v1.19.4"
    idle_timeout: float = 120.0
    max_login_attempts: int = 3
    accept_source_tag: bool = False

    def __post_init__(self):
        self.allowlist = [tuple(p) for p in self.allowlist]
        self.single_credential = tuple(self.single_credential)
        self.validate()

    def validate(self) -> None:
        if self.phase not in (1, 2, 3):
            raise ValueError(f"phase must be 1, 2 or 3, got {self.phase!r}")
        if self.phase == 2 and not self.allowlist:
            raise ValueError("phase 2 requires a non-empty allowlist")
        if self.phase == 3 and len(self.single_credential) != 2:
            raise ValueError("phase 3 requires exactly one (username, password) credential")

    def context(self, user: str = "root", cwd: str = "/") -> dict[str, str]:
        return {
            "hostname": self.hostname,
            "arch": self.arch,
            "kernel": self.kernel,
            "busybox_version": self.busybox_version,
            "user": user,
            "cwd": cwd,
        }


def load_shell_config(path: str | os.PathLike | None = None, **overrides) -> ShellConfig:
    """Build a config from a JSON file. ``command_table`` and ``fs_snapshot``
    may be inline or a path to a JSON file relative to the config file."""
    data: dict[str, Any] = {}
    base = "."
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
    data.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("command_table", "fs_snapshot"):
        if isinstance(data.get(key), str):
            with open(os.path.join(base, data[key]), encoding="utf-8") as fh:
                data[key] = json.load(fh)
    if "command_table" in data:
        data["command_table"] = [
            e if isinstance(e, CommandEntry) else CommandEntry(e["pattern"], e["response"])
            for e in data["command_table"]
        ]
    known = set(ShellConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown shell config key(s): {', '.join(sorted(unknown))}")
    return ShellConfig(**data)
