"""Command line entry points: run, sweep, replay, serve.

Exit codes are stable contracts: 0 success, 2 usage or configuration
error, 3 verification failure (replay hash mismatch).
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import signal
import sys

from .engine import (
    EngineInstance,
    ReplayError,
    ScenarioError,
    final_hash_claim,
    get_doc_path,
    load_scenario,
    parse_scenario,
    replay,
    set_doc_path,
)
from .scenarios import resolve_scenario_text
from .server import SessionServer, read_command_log, write_command_log

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3


def _fail(msg: str, code: int = EXIT_CONFIG) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _parse_override_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw  # bare strings like moore8 need no quoting


def _load_doc(path_or_name: str, overrides: list[str]) -> dict:
    text = resolve_scenario_text(path_or_name)
    config = load_scenario(text)
    doc = config.doc
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(f"override {item!r} is not key=value")
        path, raw = item.split("=", 1)
        set_doc_path(doc, path.strip(), _parse_override_value(raw.strip()))
    parse_scenario(doc)  # revalidate after overrides
    return doc


def _write_metrics_csv(path: str, rows: list[tuple[int, str, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "metric", "value"])
        writer.writerows(rows)


def _summary(engine: EngineInstance) -> str:
    parts = [f"{k}={v:g}" for k, v in sorted(engine._metrics().items())]
    parts.append(f"ticks={engine.tick_count}")
    parts.append(f"hash={engine.state_hash_hex()}")
    return " ".join(parts)


def cmd_run(args) -> int:
    try:
        doc = _load_doc(args.scenario, args.override)
    except (ScenarioError, FileNotFoundError) as exc:
        return _fail(str(exc))
    engine = EngineInstance(doc)
    engine.run()
    _write_metrics_csv(args.out, engine.export_metrics())
    if args.log:
        write_command_log(args.log, engine)
    print(_summary(engine))
    return EXIT_OK


def _sweep_values(start: float, stop: float, step: float) -> list[float]:
    values = []
    i = 0
    while True:
        v = start + i * step
        if v > stop + 1e-9:
            break
        values.append(round(v, 10))
        i += 1
    return values


def _sweep_one(doc_json: str, param: str, value: float, seed: int) -> tuple:
    doc = json.loads(doc_json)
    set_doc_path(doc, param, value)
    doc["seed"] = seed
    engine = EngineInstance(doc)
    engine.run()
    metrics = engine._metrics()
    return (value, seed, engine.tick_count, metrics)


def cmd_sweep(args) -> int:
    if args.step <= 0:
        return _fail("sweep step must be positive")
    if args.start > args.stop:
        return _fail("sweep start must not exceed stop")
    if args.seeds < 1:
        return _fail("seeds per point must be at least 1")
    try:
        doc = _load_doc(args.scenario, args.override)
        get_doc_path(doc, args.param)  # unknown parameter path fails early
    except (ScenarioError, FileNotFoundError) as exc:
        return _fail(str(exc))

    points = [(v, s) for v in _sweep_values(args.start, args.stop, args.step)
              for s in range(1, args.seeds + 1)]
    doc_json = json.dumps(doc)
    if args.workers > 1:
        from multiprocessing import Pool
        with Pool(args.workers) as pool:
            results = pool.starmap(
                _sweep_one, [(doc_json, args.param, v, s) for v, s in points])
    else:
        results = [_sweep_one(doc_json, args.param, v, s) for v, s in points]

    results.sort(key=lambda r: (r[0], r[1]))
    metric_names = sorted(results[0][3].keys()) if results else []
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value", "seed", "ticks"] + metric_names)
        for value, seed, ticks, metrics in results:
            writer.writerow([value, seed, ticks] + [metrics[n] for n in metric_names])
    print(f"wrote {len(results)} rows to {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        doc = _load_doc(args.scenario, [])
        entries = read_command_log(args.log)
    except (ScenarioError, FileNotFoundError) as exc:
        return _fail(str(exc))
    except json.JSONDecodeError as exc:
        return _fail(f"log is not valid JSON lines: {exc}")
    try:
        h = replay(doc, entries)
    except ReplayError as exc:
        return _fail(str(exc))
    print(f"hash={h:016x}")
    claim = final_hash_claim(entries)
    if claim is not None and claim != f"{h:016x}":
        print(f"hash mismatch: log claims {claim}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        doc = _load_doc(args.scenario, args.override)
    except (ScenarioError, FileNotFoundError) as exc:
        return _fail(str(exc))

    async def _serve() -> int:
        server = SessionServer(max_clients=args.max_clients)
        try:
            sid = server.create_session(doc, tick_rate_hz=args.tick_rate)
        except ScenarioError as exc:
            return _fail(str(exc))
        try:
            await server.start(host=args.host, port=args.port)
        except OSError as exc:
            return _fail(f"cannot bind port {args.port}: {exc}")
        print(f"session {sid} on ws://{args.host}:{server.port}  "
              f"(scenario {args.scenario}, {args.tick_rate or 'scenario'} Hz)")
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop.set)
        await stop.wait()
        session = server.sessions[sid]
        session.phase = "PAUSED"
        write_command_log(args.log, session.engine)
        print(f"\ncommand log flushed to {args.log} "
              f"(final hash {session.engine.state_hash_hex()})")
        await server.stop()
        return EXIT_OK

    return asyncio.run(_serve())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="microworld",
        description="Deterministic fire and ant micro-worlds: headless runs, "
                    "sweeps, replay verification, and live sessions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless and write metrics CSV")
    p_run.add_argument("scenario", help="scenario file or builtin name (e.g. fig2a)")
    p_run.add_argument("--override", action="append", default=[], metavar="PATH=VALUE",
                       help="dotted config override, e.g. params.density=0.6")
    p_run.add_argument("--out", default="metrics.csv", help="metrics CSV path")
    p_run.add_argument("--log", default=None, help="also write a replayable command log")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter over seeds")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--param", required=True, help="dotted path, e.g. params.density")
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.add_argument("--seeds", type=int, default=1, help="seeds per point")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--override", action="append", default=[], metavar="PATH=VALUE")
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_replay = sub.add_parser("replay", help="re-execute a command log and verify its hash")
    p_replay.add_argument("scenario")
    p_replay.add_argument("log", help="JSON-lines command log")
    p_replay.set_defaults(func=cmd_replay)

    p_serve = sub.add_parser("serve", help="host a live participatory session")
    p_serve.add_argument("scenario")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--tick-rate", type=float, default=None,
                         help="ticks per second (default: scenario tick_rate_hz)")
    p_serve.add_argument("--max-clients", type=int, default=40)
    p_serve.add_argument("--override", action="append", default=[], metavar="PATH=VALUE")
    p_serve.add_argument("--log", default="session_commands.jsonl",
                         help="command log flushed on shutdown")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
