"""Low-interaction busybox shell honeypot."""

from .config import DEFAULT_ALLOWLIST, CommandEntry, ShellConfig, load_shell_config
from .emulator import HoneyShell, ShellSession, authenticate, parse_download, split_composite
from .server import ShellServer, serve

__all__ = [
    "DEFAULT_ALLOWLIST",
    "CommandEntry",
    "HoneyShell",
    "ShellConfig",
    "ShellServer",
    "ShellSession",
    "authenticate",
    "load_shell_config",
    "parse_download",
    "serve",
    "split_composite",
]
