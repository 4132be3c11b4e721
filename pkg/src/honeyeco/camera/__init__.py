"""HTTP honeypot posing as a D-Link DCS-5020L/5030L IP camera."""

from .app import (
    LEAK_PATH,
    PAGES,
    STREAM_PATH,
    CameraApp,
    CameraProfile,
    CameraSession,
    Response,
    load_credentials_file,
)
from .media import make_frames, render_credentials_png, render_stream, split_parts
from .server import CameraServer, serve
from .signatures import SIGNATURES, AttackSignature, HttpRequest, classify_request

__all__ = [
    "LEAK_PATH",
    "PAGES",
    "SIGNATURES",
    "STREAM_PATH",
    "AttackSignature",
    "CameraApp",
    "CameraProfile",
    "CameraServer",
    "CameraSession",
    "HttpRequest",
    "Response",
    "classify_request",
    "load_credentials_file",
    "make_frames",
    "render_credentials_png",
    "render_stream",
    "serve",
    "split_parts",
]
