import pytest

from honeyeco.camera import CameraProfile, CameraServer
from honeyeco.events import EventSink, MemorySink
from honeyeco.shell import ShellConfig, ShellServer


@pytest.fixture
def memory_sink():
    return MemorySink()


def _start_shell(sink, **overrides):
    overrides.setdefault("accept_source_tag", True)
    server = ShellServer(("127.0.0.1", 0), ShellConfig(**overrides), sink)
    server.start_background()
    return server


@pytest.fixture
def shell_server(memory_sink):
    server = _start_shell(memory_sink)
    yield server
    server.shutdown()
    server.server_close()


@pytest.fixture
def start_shell():
    started = []

    def factory(sink, **overrides):
        s = _start_shell(sink, **overrides)
        started.append(s)
        return s

    yield factory
    for s in started:
        s.shutdown()
        s.server_close()


@pytest.fixture
def camera_server(memory_sink, tmp_path):
    profile = CameraProfile(accept_source_tag=True, artifacts_dir=str(tmp_path / "artifacts"), fps=50)
    server = CameraServer(("127.0.0.1", 0), profile, memory_sink)
    server.start_background()
    yield server
    server.shutdown()
    server.server_close()


@pytest.fixture
def file_sink(tmp_path):
    sink = EventSink(tmp_path / "events.jsonl")
    yield sink
    sink.close()


@pytest.fixture(scope="session")
def scenario_log(tmp_path_factory):
    """Factory: run a shipped scenario against live honeypots once per test
    session and return (log path, manifest)."""
    from honeyeco.attacksim import load_scenario, run_scenario

    cache = {}

    def run(name, seed=7):
        if (name, seed) in cache:
            return cache[name, seed]
        d = tmp_path_factory.mktemp(f"scn-{name}")
        path = d / "events.jsonl"
        sink = EventSink(path)
        shell = ShellServer(("127.0.0.1", 0), ShellConfig(accept_source_tag=True), sink)
        cam = CameraServer(("127.0.0.1", 0), CameraProfile(accept_source_tag=True, artifacts_dir=str(d / "art")), sink)
        shell.start_background()
        cam.start_background()
        try:
            manifest = run_scenario(load_scenario(name), seed, ("127.0.0.1", shell.port), ("127.0.0.1", cam.port))
        finally:
            for s in (shell, cam):
                s.shutdown()
                s.server_close()
            sink.close()
        cache[name, seed] = (path, manifest)
        return cache[name, seed]

    return run


# -- acceptance summary: one line per criterion --

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[marker] = (report.outcome, report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result().acceptance = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), (outcome, duration) in sorted(_ACCEPTANCE.items()):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  {title} ({duration:.2f} s)")
