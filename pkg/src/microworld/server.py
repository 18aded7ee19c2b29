"""Networked participatory sessions over WebSocket.

One session owns one engine and advances it on a lockstep clock. Every
participant steers one agent; steering commands are buffered and take
effect exactly at the next tick boundary, last write per agent wins. The
facilitator (the first client to join) commits menu choices, pauses and
resumes; everyone else can vote. All engine inputs flow through the
engine's command log, so a finished session replays to the same state hash.

Wire protocol: one JSON object per WebSocket text frame.

  client -> server
    {"t":"join","session":s,"name":n}
    {"t":"cmd","agent":a,"action":{"kind":...}}
    {"t":"choice","menu":m,"option":o}          facilitator only
    {"t":"vote","menu":m,"option":o}
    {"t":"pause"} | {"t":"resume"}              facilitator only
    {"t":"sync"}                                request a full snapshot

  server -> client
    {"t":"welcome","agent":a,"role":r,"session":s,"snapshot":{...}}
    {"t":"menu","id":m,"label":l,"options":[...],"tally":{...}}
    {"t":"tick","n":k,"delta":{"cells":[...],"agents":[...],"metrics":{...},
                               "food":[...],"tick":j,"finished":b}}
    {"t":"snapshot", ...}                       full resync
    {"t":"restart","config":{...}}              after a committed choice
    {"t":"joined","name":n,"agent":a}           membership updates
    {"t":"ack","for":type,"applies_at_tick":k}
    {"t":"err","code":c,"msg":m}

Steerable agents exist only in ant runs; fire sessions are facilitator-only
(menus and parameters), with every other client an observer.

Concurrency: everything for a session runs on one asyncio loop. Slow
clients never block the tick: each connection has a bounded outbound queue,
and a client that falls more than the queue length behind has its queue
dropped and receives a full snapshot instead.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .engine import (
    ChoiceError,
    EngineInstance,
    ScenarioError,
    menus_for,
    parse_scenario,
)

OUTBOUND_QUEUE_LIMIT = 64
_SNAPSHOT_MARK = object()

VALID_ACTIONS = {"set_heading", "turn_left", "turn_right", "stop", "go"}


class SessionError(Exception):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code
        self.msg = msg


@dataclass
class Client:
    name: str
    role: str                 # "facilitator" | "participant" | "observer"
    agent_id: int | None
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(OUTBOUND_QUEUE_LIMIT))
    writer: asyncio.Task | None = None


class Session:
    """One lockstep run shared by a classroom."""

    def __init__(self, session_id: str, config_doc: dict, tick_rate_hz: float):
        if not 1 <= tick_rate_hz <= 60:
            raise ScenarioError(f"tick_rate_hz must be in [1, 60], got {tick_rate_hz}")
        self.session_id = session_id
        self.engine = EngineInstance(parse_scenario(config_doc))
        self.tick_rate_hz = float(tick_rate_hz)
        self.phase = "LOBBY"             # LOBBY | RUNNING | PAUSED
        self.clients: dict[str, Client] = {}
        self.join_order: list[str] = []
        self.pending: dict[int, dict] = {}   # agent_id -> action for next tick
        self.votes: dict[str, dict[str, str]] = {}  # menu -> voter name -> option
        self._loop_task: asyncio.Task | None = None

    # -- membership ------------------------------------------------------

    @property
    def agent_slots(self) -> int:
        return self.engine.config.n_ants if self.engine.config.model == "ants" else 0

    def join(self, name: str) -> Client:
        if name in self.clients:
            raise SessionError("name_taken", f"client name {name!r} already joined")
        taken = {c.agent_id for c in self.clients.values() if c.agent_id is not None}
        agent_id = next((i for i in range(self.agent_slots) if i not in taken), None)
        role = "facilitator" if not self.join_order else (
            "participant" if agent_id is not None else "observer")
        if role == "observer":
            agent_id = None
        client = Client(name=name, role=role, agent_id=agent_id)
        self.clients[name] = client
        self.join_order.append(name)
        return client

    def leave(self, name: str) -> None:
        client = self.clients.pop(name, None)
        if client is None:
            return
        if client.agent_id is not None:
            # agent falls back to autonomous motion at the next tick
            self.pending[client.agent_id] = {"kind": "go"}
        if client.role == "facilitator":
            for other in self.join_order:
                if other in self.clients:
                    self.clients[other].role = "facilitator"
                    break

    def facilitator(self) -> Client | None:
        for c in self.clients.values():
            if c.role == "facilitator":
                return c
        return None

    # -- inputs ------------------------------------------------------------

    def submit_command(self, name: str, agent_id: int, action: dict) -> int:
        client = self.clients.get(name)
        if client is None:
            raise SessionError("unknown_client", f"{name!r} has not joined")
        if self.phase != "RUNNING":
            raise SessionError("not_running", "session is not running")
        if client.agent_id != agent_id:
            raise SessionError("not_owner", f"agent {agent_id} is not yours")
        kind = action.get("kind") if isinstance(action, dict) else None
        if kind not in VALID_ACTIONS:
            raise SessionError("bad_action", f"unknown steering action {kind!r}")
        if kind == "set_heading" and not isinstance(action.get("degrees"), (int, float)):
            raise SessionError("bad_action", "set_heading needs numeric degrees")
        self.pending[agent_id] = action
        return self.engine.global_step + 1

    def submit_choice(self, name: str, menu_id: str, option_id: str) -> None:
        client = self.clients.get(name)
        if client is None or client.role != "facilitator":
            raise SessionError("not_facilitator", "only the facilitator commits choices")
        try:
            self.engine.apply_choice(menu_id, option_id)
        except ChoiceError as exc:
            raise SessionError("unknown_option", str(exc)) from None
        self.pending.clear()

    def submit_vote(self, name: str, menu_id: str, option_id: str) -> dict[str, int]:
        from .engine import find_option
        try:
            find_option(menu_id, option_id)
        except ChoiceError as exc:
            raise SessionError("unknown_option", str(exc)) from None
        self.votes.setdefault(menu_id, {})[name] = option_id
        return self.tally(menu_id)

    def tally(self, menu_id: str) -> dict[str, int]:
        counts: dict[str, int] = {}
        for option in self.votes.get(menu_id, {}).values():
            counts[option] = counts.get(option, 0) + 1
        return counts

    # -- stepping ----------------------------------------------------------

    def lockstep_tick(self) -> dict:
        """Drain the inbox, advance the engine once, return the tick frame."""
        steering = self.pending or None
        self.pending = {}
        report = self.engine.tick(steering=steering)
        return {
            "t": "tick",
            "n": report.global_step,
            "delta": {
                "tick": report.tick,
                "cells": [list(c) for c in report.changed_cells],
                "agents": report.agent_positions,
                "food": [list(f) for f in report.food_changes],
                "metrics": report.metrics,
                "finished": report.finished,
            },
        }


class SessionServer:
    """Hosts many sessions; each session's engine is confined to the loop."""

    def __init__(self, max_clients: int = 40):
        self.max_clients = max_clients
        self.sessions: dict[str, Session] = {}
        self._next_id = 0
        self._server = None

    # -- session management ----------------------------------------------

    def create_session(self, config_doc: dict, tick_rate_hz: float | None = None) -> str:
        config = parse_scenario(config_doc)  # validate before allocating an id
        self._next_id += 1
        sid = f"s{self._next_id}"
        self.sessions[sid] = Session(
            sid, config.doc,
            tick_rate_hz if tick_rate_hz is not None else config.tick_rate_hz)
        return sid

    async def start(self, host: str = "127.0.0.1", port: int = 0):
        self._server = await serve(self._handler, host, port)
        return self

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def stop(self):
        for session in self.sessions.values():
            if session._loop_task is not None:
                session._loop_task.cancel()
        self._server.close()
        await self._server.wait_closed()

    # -- broadcasting -------------------------------------------------------

    def _enqueue(self, client: Client, frame: dict) -> None:
        try:
            client.queue.put_nowait(frame)
        except asyncio.QueueFull:
            # too far behind: drop everything queued, resync with a snapshot
            while not client.queue.empty():
                client.queue.get_nowait()
            client.queue.put_nowait(_SNAPSHOT_MARK)

    def broadcast(self, session: Session, frame: dict, exclude: str | None = None) -> None:
        for name, client in session.clients.items():
            if name != exclude:
                self._enqueue(client, frame)

    def _menu_frames(self, session: Session) -> list[dict]:
        return [
            {
                "t": "menu",
                "id": menu.menu_id,
                "label": menu.label,
                "options": [{"id": o.option_id, "label": o.label} for o in menu.options],
                "tally": session.tally(menu.menu_id),
            }
            for menu in menus_for(session.engine.config.model)
        ]

    def _snapshot_frame(self, session: Session) -> dict:
        return {"t": "snapshot", **session.engine.snapshot()}

    # -- tick loop ------------------------------------------------------------

    def _ensure_loop(self, session: Session) -> None:
        if session._loop_task is None or session._loop_task.done():
            session._loop_task = asyncio.get_running_loop().create_task(
                self._run_loop(session))

    async def _run_loop(self, session: Session) -> None:
        interval = 1.0 / session.tick_rate_hz
        loop = asyncio.get_running_loop()
        next_at = loop.time() + interval
        while True:
            await asyncio.sleep(max(0.0, next_at - loop.time()))
            next_at += interval
            if session.phase != "RUNNING":
                continue
            frame = session.lockstep_tick()
            self.broadcast(session, frame)

    # -- connection handling ---------------------------------------------------

    async def _writer(self, ws, session: Session, client: Client) -> None:
        try:
            while True:
                item = await client.queue.get()
                if item is _SNAPSHOT_MARK:
                    item = self._snapshot_frame(session)
                await ws.send(json.dumps(item))
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    async def _handler(self, ws) -> None:
        session: Session | None = None
        client: Client | None = None
        total = sum(len(s.clients) for s in self.sessions.values())
        if total >= self.max_clients:
            await ws.send(json.dumps(
                {"t": "err", "code": "server_full", "msg": "too many clients"}))
            await ws.close()
            return
        try:
            async for raw in ws:
                try:
                    frame = json.loads(raw)
                    if not isinstance(frame, dict):
                        raise ValueError("frame must be an object")
                except ValueError:
                    await ws.send(json.dumps(
                        {"t": "err", "code": "bad_frame", "msg": "not a JSON object"}))
                    continue
                try:
                    session, client = await self._dispatch(ws, frame, session, client)
                except SessionError as exc:
                    await ws.send(json.dumps(
                        {"t": "err", "code": exc.code, "msg": exc.msg}))
        except ConnectionClosed:
            pass
        finally:
            if session is not None and client is not None:
                session.leave(client.name)
                if client.writer is not None:
                    client.writer.cancel()
                self.broadcast(session, {"t": "joined", "name": client.name,
                                         "agent": None, "left": True})

    async def _dispatch(self, ws, frame: dict, session: Session | None,
                        client: Client | None):
        t = frame.get("t")
        if t == "join":
            if client is not None:
                raise SessionError("already_joined", "this connection already joined")
            sid = frame.get("session")
            if sid not in self.sessions:
                raise SessionError("unknown_session", f"no session {sid!r}")
            name = frame.get("name")
            if not isinstance(name, str) or not name:
                raise SessionError("bad_frame", "join needs a non-empty name")
            session = self.sessions[sid]
            client = session.join(name)
            client.writer = asyncio.get_running_loop().create_task(
                self._writer(ws, session, client))
            await ws.send(json.dumps({
                "t": "welcome", "agent": client.agent_id, "role": client.role,
                "session": sid, "snapshot": session.engine.snapshot(),
            }))
            for menu_frame in self._menu_frames(session):
                self._enqueue(client, menu_frame)
            self.broadcast(session, {"t": "joined", "name": name, "agent": client.agent_id},
                           exclude=name)
            return session, client

        if session is None or client is None:
            raise SessionError("not_joined", "join a session first")

        if t == "cmd":
            applies_at = session.submit_command(
                client.name, frame.get("agent"), frame.get("action") or {})
            self._enqueue(client, {"t": "ack", "for": "cmd", "applies_at_tick": applies_at})
        elif t == "choice":
            session.submit_choice(client.name, frame.get("menu"), frame.get("option"))
            self.broadcast(session, {"t": "restart", "config": session.engine.config.doc})
            for c in session.clients.values():
                self._enqueue(c, _SNAPSHOT_MARK)
            self._enqueue(client, {"t": "ack", "for": "choice",
                                   "applies_at_tick": session.engine.global_step})
        elif t == "vote":
            session.submit_vote(client.name, frame.get("menu"), frame.get("option"))
            for menu_frame in self._menu_frames(session):
                if menu_frame["id"] == frame.get("menu"):
                    self.broadcast(session, menu_frame)
        elif t == "sync":
            self._enqueue(client, _SNAPSHOT_MARK)
        elif t == "pause":
            self._require_facilitator(client)
            session.phase = "PAUSED"
        elif t == "resume":
            self._require_facilitator(client)
            session.phase = "RUNNING"
            self._ensure_loop(session)
        else:
            raise SessionError("unknown_type", f"unknown message type {t!r}")
        return session, client

    @staticmethod
    def _require_facilitator(client: Client) -> None:
        if client.role != "facilitator":
            raise SessionError("not_facilitator", "facilitator only")


def write_command_log(path: str, engine: EngineInstance) -> None:
    """Flush an engine's command log as JSON lines, final hash included."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in engine.log_entries(include_final=True):
            fh.write(json.dumps(entry) + "\n")


def read_command_log(path: str) -> list[dict]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(json.loads(line))
    return entries
