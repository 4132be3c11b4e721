"""Raster assets: looping camera frames and the credential honeytoken image."""

from __future__ import annotations

import io
from typing import Iterator, Sequence

from PIL import Image, ImageDraw, ImageFont

BOUNDARY = "dcsboundary"
STREAM_CONTENT_TYPE = f"multipart/x-mixed-replace; boundary={BOUNDARY}"


def make_frames(count: int = 20, size: tuple[int, int] = (320, 240), label: str = "DCS-5020L") -> list[bytes]:
    """A short fixed clip: a dim static scene with a slowly panning bar.
    Deterministic for a given (count, size, label)."""
    w, h = size
    frames = []
    font = ImageFont.load_default()
    for i in range(count):
        img = Image.new("RGB", size, (38, 44, 40))
        draw = ImageDraw.Draw(img)
        draw.rectangle([0, int(h * 0.65), w, h], fill=(58, 62, 55))
        draw.rectangle([int(w * 0.15), int(h * 0.3), int(w * 0.4), int(h * 0.65)], fill=(70, 70, 82))
        x = int((i / count) * w)
        draw.rectangle([x, int(h * 0.45), x + 24, int(h * 0.62)], fill=(90, 86, 80))
        draw.text((6, 6), f"{label}  CAM1", fill=(220, 220, 220), font=font)
        buf = io.BytesIO()
        img.save(buf, format="JPEG", quality=70)
        frames.append(buf.getvalue())
    return frames


def multipart_part(frame: bytes) -> bytes:
    head = (
        f"--{BOUNDARY}\r\nContent-Type: image/jpeg\r\nContent-Length: {len(frame)}\r\n\r\n"
    ).encode("ascii")
    return head + frame + b"\r\n"


def render_stream(frames: Sequence[bytes], parts: int | None = None) -> Iterator[bytes]:
    """Multipart parts cycling the bundle; last frame is followed by the
    first. ``parts=None`` streams until the consumer stops."""
    if not frames:
        raise ValueError("empty frame bundle")
    i = 0
    while parts is None or i < parts:
        yield multipart_part(frames[i % len(frames)])
        i += 1


def split_parts(stream: bytes) -> list[bytes]:
    """Recover frame payloads from a multipart byte stream using the
    Content-Length of each part."""
    frames = []
    pos = 0
    marker = f"--{BOUNDARY}\r\n".encode("ascii")
    while True:
        start = stream.find(marker, pos)
        if start < 0:
            break
        header_end = stream.find(b"\r\n\r\n", start)
        if header_end < 0:
            break
        headers = stream[start + len(marker):header_end].decode("ascii", "replace").split("\r\n")
        length = next(int(h.split(":", 1)[1]) for h in headers if h.lower().startswith("content-length"))
        body_start = header_end + 4
        if body_start + length > len(stream):
            break
        frames.append(stream[body_start:body_start + length])
        pos = body_start + length
    return frames


def render_credentials_png(username: str, password: str, scale: int = 2) -> bytes:
    """The honeytoken: credentials drawn into a PNG so they are readable by
    eye only. No text chunks are written."""
    font = ImageFont.load_default()
    lines = [f"User Name : {username}", f"Password  : {password}"]
    w, h = 220, 44
    img = Image.new("L", (w, h), 255)
    draw = ImageDraw.Draw(img)
    for n, line in enumerate(lines):
        draw.text((6, 6 + 18 * n), line, fill=0, font=font)
    img = img.resize((w * scale, h * scale), Image.NEAREST)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
