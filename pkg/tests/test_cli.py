import json
import os
import socket
import subprocess
import sys
import time

import pytest

from honeyeco.attacksim import ShellClient
from honeyeco.cli import main
from honeyeco.config import ConfigError, load_config, parse_k
from honeyeco.events import load_events


def write_ini(path, text):
    path.write_text(text)
    return path


def test_config_sections_and_relative_paths(tmp_path):
    (tmp_path / "rules.json").write_text("[]")
    cfg = load_config(write_ini(tmp_path / "h.ini", """
[paths]
logs = logs/events.jsonl
rules = rules.json
[analytics]
k = auto
k_min = 2
k_max = 6
seed = 11
[grouping]
min_actors = 4
[shell]
port = 2424
phase = 3
"""), env={})
    assert cfg.paths["logs"] == str(tmp_path / "logs" / "events.jsonl")
    assert cfg.paths["rules"] == str(tmp_path / "rules.json")
    assert (cfg.k, cfg.k_min, cfg.k_max, cfg.seed) == ("auto", 2, 6, 11)
    assert cfg.min_actors == 4 and cfg.min_clusters == 10
    assert cfg.shell_port == 2424 and cfg.shell_phase == 3


def test_env_overrides_paths_only(tmp_path):
    ini = write_ini(tmp_path / "h.ini", "[paths]\nlogs = a.jsonl\n[analytics]\nseed = 3\n")
    cfg = load_config(ini, env={"HONEYECO_LOGS": "/var/x.jsonl", "HONEYECO_SEED": "99"})
    assert cfg.paths["logs"] == "/var/x.jsonl"
    assert cfg.seed == 3


def test_seed_is_mandatory():
    cfg = load_config(env={})
    with pytest.raises(ConfigError):
        cfg.require_seed()
    assert cfg.require_seed(5) == 5


@pytest.mark.parametrize("text", [
    "[analytics]\nk = 0\n",
    "[grouping]\nmin_actors = 0\n",
    "[analytics]\nk_min = 5\nk_max = 2\n",
    "[paths]\nrules = missing.json\n",
    "[bogus]\nx = 1\n",
    "[shell]\ncolour = red\n",
])
def test_invalid_config_rejected(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write_ini(tmp_path / "h.ini", text), env={})


def test_parse_k():
    assert parse_k("auto") == "auto" and parse_k("4") == 4
    for bad in ("0", "-1", "many"):
        with pytest.raises(ConfigError):
            parse_k(bad)


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["report", "--events", "x", "--nope"])
    assert info.value.code == 2


def test_cluster_k_zero_exits_1(tmp_path, capsys):
    cmds = tmp_path / "cmds.txt"
    cmds.write_text("uname -a\nfree -m\nps\n")
    assert main(["cluster", "--in", str(cmds), "--k", "0", "--seed", "1", "--out", str(tmp_path / "a.jsonl")]) == 1
    assert "k must be" in capsys.readouterr().err


def test_cluster_without_seed_exits_1(tmp_path, capsys):
    cmds = tmp_path / "cmds.txt"
    cmds.write_text("uname -a\nfree -m\n")
    assert main(["cluster", "--in", str(cmds), "--k", "2", "--out", str(tmp_path / "a.jsonl")]) == 1
    assert "seed" in capsys.readouterr().err


def test_missing_input_exits_1(tmp_path):
    assert main(["report", "--events", str(tmp_path / "absent.jsonl")]) == 1


def test_pipeline_writes_run_dir(scenario_log, tmp_path):
    log, _ = scenario_log("default")
    out = tmp_path / "run"
    assert main(["pipeline", "--events", str(log), "--k", "auto", "--seed", "1", "--out", str(out)]) == 0
    for name in ("assignment.jsonl", "report.json", "groups.csv", "statemachine.dot", "statemachine.json",
                 "run_manifest.json"):
        assert (out / name).exists(), name
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["k_requested"] == "auto"
    assert len(manifest["inputs"]["events"]["sha256"]) == 64
    assert {"honeyeco", "python", "numpy"} <= set(manifest["versions"])


def test_cluster_then_group(scenario_log, tmp_path):
    log, _ = scenario_log("default")
    assignment = tmp_path / "a.jsonl"
    assert main(["cluster", "--in", str(log), "--k", "4", "--seed", "2", "--out", str(assignment)]) == 0
    lines = [json.loads(line) for line in assignment.read_text().splitlines()]
    assert lines and all(0 <= r["cluster"] < 4 for r in lines)
    assert main(["group", "--assignment", str(assignment), "--events", str(log), "--out", str(tmp_path / "g")]) == 0
    assert (tmp_path / "g" / "report.json").exists()


def test_ingest_and_report(scenario_log, tmp_path, capsys):
    log, _ = scenario_log("default")
    out = tmp_path / "norm.jsonl"
    assert main(["ingest", "--in", str(log), "--out", str(out), "--strict"]) == 0
    assert load_events(out).events == load_events(log).events
    capsys.readouterr()
    assert main(["report", "--events", str(log), "--json"]) == 0
    tables = json.loads(capsys.readouterr().out)
    assert tables


def test_simulate_plan_only(tmp_path):
    out = tmp_path / "m.json"
    assert main(["simulate", "--scenario", "two_families", "--seed", "4", "--manifest-out", str(out), "--plan-only"]) == 0
    manifest = json.loads(out.read_text())
    assert manifest["seed"] == 4 and len(manifest["actors"]) == 8


def test_config_file_drives_pipeline(scenario_log, tmp_path):
    log, _ = scenario_log("default")
    ini = write_ini(tmp_path / "h.ini", f"[paths]\nreports = out\n[analytics]\nseed = 9\nk = 3\n")
    assert main(["--config", str(ini), "pipeline", "--events", str(log)]) == 0
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["seed"] == 9 and manifest["k_selected"] == 3


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_shell_smoke(tmp_path):
    port = _free_port()
    log = tmp_path / "shell.jsonl"
    proc = subprocess.Popen(
        [sys.executable, "-m", "honeyeco", "serve", "shell", "--phase", "2", "--log", str(log),
         "--host", "127.0.0.1", "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.PIPE,
    )
    try:
        deadline = time.monotonic() + 10
        while True:
            try:
                socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
                break
            except OSError:
                if time.monotonic() > deadline or proc.poll() is not None:
                    pytest.fail(f"server did not start: {proc.stderr.read().decode()}")
                time.sleep(0.1)
        before = log.stat().st_size if log.exists() else 0
        with ShellClient("127.0.0.1", port, 5) as c:
            c.read_banner()
            assert c.login("admin", "1234")
            c.run("uname -a")
            c.exit()
        time.sleep(0.3)
        assert log.stat().st_size > before
    finally:
        proc.terminate()
        proc.wait(timeout=10)
    assert proc.returncode in (0, 130)
    kinds = [e.kind.value for e in load_events(log).events]
    assert "login_success" in kinds and "command" in kinds and kinds[-1] == "disconnect"
