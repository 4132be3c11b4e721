"""Command line entry point: ``honeyeco <subcommand> ...``.

Exit status: 0 on success, 1 when a module rejects its input or fails,
2 for usage errors (unknown subcommand or flag).
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
from pathlib import Path

from .config import AppConfig, ConfigError, load_config, parse_k

log = logging.getLogger("honeyeco")


def _target(value: str) -> tuple[str, int]:
    from .attacksim import parse_target

    try:
        return parse_target(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sigterm_to_interrupt() -> None:
    # serve loops stop on KeyboardInterrupt and flush their sink
    def handler(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, handler)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="honeyeco", description="IoT honeypots and attacker-behaviour analysis.")
    p.add_argument("--config", dest="app_config", help="INI configuration file")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    serve = sub.add_parser("serve", help="run a honeypot")
    ssub = serve.add_subparsers(dest="service", required=True, metavar="SERVICE")
    sh = ssub.add_parser("shell", help="fake busybox telnet shell")
    sh.add_argument("--phase", type=int, choices=(1, 2, 3))
    sh.add_argument("--config", dest="shell_config", help="shell JSON config (command table, filesystem)")
    sh.add_argument("--log", required=True, help="event log (JSON lines, appended)")
    sh.add_argument("--idle-timeout", type=float)
    sh.add_argument("--host")
    sh.add_argument("--port", type=int)
    sh.add_argument("--accept-source-tag", action="store_true", help="test mode: honour synthetic source tags")

    cam = ssub.add_parser("camera", help="fake IP camera web interface")
    cam.add_argument("--model", choices=("DCS-5020L", "DCS-5030L"))
    cam.add_argument("--port", type=int)
    cam.add_argument("--host")
    cam.add_argument("--creds-file")
    cam.add_argument("--log", required=True)
    cam.add_argument("--artifacts", help="artifact store directory")
    cam.add_argument("--accept-source-tag", action="store_true")

    ing = sub.add_parser("ingest", help="validate and normalize an event log")
    ing.add_argument("--in", dest="inp", required=True)
    ing.add_argument("--dialect", choices=("native", "cowrie"), default="native")
    ing.add_argument("--out", help="write normalized native JSON lines here")
    ing.add_argument("--strict", action="store_true")

    cl = sub.add_parser("cluster", help="cluster command lines")
    cl.add_argument("--in", dest="inp", required=True, help="event log (.jsonl) or command list (one per line)")
    cl.add_argument("--dialect", choices=("native", "cowrie"), default="native")
    cl.add_argument("--k", help="component count or 'auto'")
    cl.add_argument("--k-min", type=int)
    cl.add_argument("--k-max", type=int)
    cl.add_argument("--seed", type=int)
    cl.add_argument("--rules", help="objective rules JSON")
    cl.add_argument("--feature-mode", choices=("similarity", "counts"))
    cl.add_argument("--out", required=True, help="assignment file (JSON lines)")

    gr = sub.add_parser("group", help="mine actor groups and the goal state machine")
    gr.add_argument("--assignment", required=True)
    gr.add_argument("--events", required=True)
    gr.add_argument("--dialect", choices=("native", "cowrie"), default="native")
    gr.add_argument("--min-actors", type=int)
    gr.add_argument("--min-clusters", type=int)
    gr.add_argument("--goals", help="goal rules JSON")
    gr.add_argument("--enrichment", help="offline reputation JSON {ip: label}")
    gr.add_argument("--out", required=True, help="output directory")

    sim = sub.add_parser("simulate", help="run a synthetic attacker scenario")
    sim.add_argument("--scenario", required=True, help="scenario JSON or shipped scenario name")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--shell", type=_target, help="host:port")
    sim.add_argument("--camera", type=_target, help="host:port")
    sim.add_argument("--manifest-out", required=True)
    sim.add_argument("--workers", type=int, default=8)
    sim.add_argument("--plan-only", action="store_true", help="write the manifest without connecting")

    vet = sub.add_parser("vet", help="probe a shell honeypot for fingerprintable tells")
    vet.add_argument("--target", type=_target, required=True, help="host:port")
    vet.add_argument("--user", default="admin")
    vet.add_argument("--password", default="1234")
    vet.add_argument("--out", help="write the JSON report here")

    rep = sub.add_parser("report", help="credential, command, download and HTTP tables from an event log")
    rep.add_argument("--events", required=True)
    rep.add_argument("--dialect", choices=("native", "cowrie"), default="native")
    rep.add_argument("--top", type=int, default=10)
    rep.add_argument("--json", action="store_true")

    pipe = sub.add_parser("pipeline", help="ingest -> cluster -> group -> report into a run directory")
    pipe.add_argument("--events", required=True)
    pipe.add_argument("--dialect", choices=("native", "cowrie"), default="native")
    pipe.add_argument("--k")
    pipe.add_argument("--k-min", type=int)
    pipe.add_argument("--k-max", type=int)
    pipe.add_argument("--seed", type=int)
    pipe.add_argument("--rules")
    pipe.add_argument("--goals")
    pipe.add_argument("--enrichment")
    pipe.add_argument("--min-actors", type=int)
    pipe.add_argument("--min-clusters", type=int)
    pipe.add_argument("--out", help="run directory (default: [paths] reports or ./run)")
    return p


def _pick(flag, default):
    return default if flag is None else flag


def _k_settings(args, cfg: AppConfig):
    k = parse_k(args.k) if args.k is not None else cfg.k
    k_min, k_max = _pick(args.k_min, cfg.k_min), _pick(args.k_max, cfg.k_max)
    if not 1 <= k_min <= k_max:
        raise ConfigError(f"need 1 <= k-min <= k-max, got {k_min}..{k_max}")
    return k, range(k_min, k_max + 1)


def _thresholds(args, cfg: AppConfig) -> tuple[int, int]:
    a, c = _pick(args.min_actors, cfg.min_actors), _pick(args.min_clusters, cfg.min_clusters)
    if a < 1 or c < 1:
        raise ConfigError("--min-actors and --min-clusters must be >= 1")
    return a, c


def cmd_serve(args, cfg: AppConfig) -> int:
    from .events import EventSink

    _sigterm_to_interrupt()
    sink = EventSink(args.log)
    if args.service == "shell":
        from .shell import load_shell_config, serve

        conf = load_shell_config(
            args.shell_config or cfg.path("shell_config"),
            phase=_pick(args.phase, cfg.shell_phase),
            idle_timeout=_pick(args.idle_timeout, cfg.shell_idle_timeout),
            accept_source_tag=args.accept_source_tag or None,
        )
        serve(conf, (_pick(args.host, cfg.shell_host), _pick(args.port, cfg.shell_port)), sink)
        return 0

    from .camera import CameraProfile, load_credentials_file, serve

    kwargs = {
        "model": _pick(args.model, cfg.camera_model),
        "port": _pick(args.port, cfg.camera_port),
        "artifacts_dir": args.artifacts or cfg.path("artifacts") or "artifacts",
        "accept_source_tag": args.accept_source_tag,
    }
    creds = args.creds_file or cfg.camera_creds_file
    if creds:
        kwargs["credentials"] = load_credentials_file(creds)
    profile = CameraProfile(**kwargs)
    serve(profile, (_pick(args.host, cfg.camera_host), profile.port), sink)
    return 0


def cmd_ingest(args, cfg: AppConfig) -> int:
    from .events import load_events

    res = load_events(args.inp, args.dialect, strict=args.strict)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for ev in res.events:
                fh.write(json.dumps(ev.to_record(), sort_keys=True, ensure_ascii=False) + "\n")
    kinds: dict[str, int] = {}
    for ev in res.events:
        kinds[ev.kind.value] = kinds.get(ev.kind.value, 0) + 1
    print(json.dumps({"events": len(res.events), "kinds": dict(sorted(kinds.items())),
                      "skipped": res.skipped, "skip_reasons": dict(sorted(res.reasons.items())),
                      "unexplained": res.unexplained}, indent=2))
    return 0


def cmd_cluster(args, cfg: AppConfig) -> int:
    from .analytics import cluster_commands, load_rules, write_assignment
    from .pipeline import read_commands

    k, k_range = _k_settings(args, cfg)
    seed = cfg.require_seed(args.seed)
    commands = read_commands(args.inp, args.dialect)
    result = cluster_commands(commands, k, seed, load_rules(args.rules or cfg.path("rules")),
                              feature_mode=args.feature_mode or cfg.feature_mode, k_range=k_range,
                              n_init=cfg.n_init, tol=cfg.tol, max_iter=cfg.max_iter)
    write_assignment(args.out, result)
    print(f"{len(commands)} commands -> K={result.assignment.k}; wrote {args.out}")
    return 0


def cmd_group(args, cfg: AppConfig) -> int:
    from .analytics import read_assignment
    from .events import load_enrichment, load_events
    from .grouping import load_goal_rules, write_report
    from .pipeline import group_actors

    min_actors, min_clusters = _thresholds(args, cfg)
    assignment, objectives = read_assignment(args.assignment)
    events = load_events(args.events, args.dialect).events
    report = group_actors(assignment, objectives, events, min_actors, min_clusters,
                          load_goal_rules(args.goals or cfg.path("goals")),
                          load_enrichment(args.enrichment or cfg.path("enrichment")))
    write_report(report, args.out)
    print(f"{len(report.groups)} groups; wrote {args.out}")
    return 0


def cmd_simulate(args, cfg: AppConfig) -> int:
    from .attacksim import build_manifest, load_scenario, plan_actors, run_scenario

    seed = cfg.require_seed(args.seed)
    scenario = load_scenario(args.scenario)
    if args.plan_only:
        manifest = build_manifest(scenario, plan_actors(scenario, seed), seed)
    else:
        if args.shell is None and args.camera is None:
            raise ConfigError("simulate needs --shell and/or --camera (or --plan-only)")
        manifest = run_scenario(scenario, seed, args.shell, args.camera, workers=args.workers)
    Path(args.manifest_out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{len(manifest['actors'])} actors; wrote {args.manifest_out}")
    return 0


def cmd_vet(args, cfg: AppConfig) -> int:
    from .attacksim import fingerprint_probe

    report = fingerprint_probe(args.target[0], args.target[1], (args.user, args.password))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<22} {c.detail}")
    if not report.complete:
        print(f"INCOMPLETE  {report.error}")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    return 0 if report.passed else 1


def cmd_report(args, cfg: AppConfig) -> int:
    from .events import load_events
    from .grouping import build_report, build_state_machine, top_commands, top_credentials

    events = load_events(args.events, args.dialect).events
    report = build_report([], [], build_state_machine([]), events)
    report.credentials = top_credentials(events, args.top)
    report.commands = top_commands(events, args.top)
    if args.json:
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report.text())
    return 0


def cmd_pipeline(args, cfg: AppConfig) -> int:
    from .events import load_enrichment
    from .pipeline import run_pipeline

    k, k_range = _k_settings(args, cfg)
    seed = cfg.require_seed(args.seed)
    min_actors, min_clusters = _thresholds(args, cfg)
    out = args.out or cfg.path("reports") or "run"
    manifest = run_pipeline(
        args.events, out, seed, k=k, k_range=k_range, dialect=args.dialect,
        rules_path=args.rules or cfg.path("rules"), goals_path=args.goals or cfg.path("goals"),
        min_actors=min_actors, min_clusters=min_clusters,
        enrichment=load_enrichment(args.enrichment or cfg.path("enrichment")),
        n_init=cfg.n_init, tol=cfg.tol, max_iter=cfg.max_iter, feature_mode=cfg.feature_mode,
    )
    print(f"K={manifest['k_selected']}, {manifest['groups']} groups; wrote {out}")
    return 0


COMMANDS = {
    "serve": cmd_serve,
    "ingest": cmd_ingest,
    "cluster": cmd_cluster,
    "group": cmd_group,
    "simulate": cmd_simulate,
    "vet": cmd_vet,
    "report": cmd_report,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.app_config)
        return COMMANDS[args.command](args, cfg)
    except KeyboardInterrupt:
        return 130
    except (ValueError, KeyError, OSError, ConnectionError, RuntimeError) as exc:
        print(f"honeyeco {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
