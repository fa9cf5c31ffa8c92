"""Realtime session layer: websocket transport over the shared game driver.

One FastAPI app hosts many games. Every state-mutating input of a game —
player frames, bot frames, deadline ticks — passes through that game's
single asyncio queue and is applied by one loop task, so game state is
linearizable per game id while sessions merely enqueue. Outbound delivery
is per-socket FIFO via a sender task per connection.

Bots declared with ``--bots`` run in-process: each new game gets the
configured roster, and every bot consumes the same broadcast stream as a
remote client would, through its own worker task (slow policies, such as
endpoint-backed ones, never stall the game loop).
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from participation_game import session as proto
from participation_game.bots import BotAdapter
from participation_game.core import GameConfig, GameError
from participation_game.llm import EndpointConfig
from participation_game.session import GameSession, SessionError, error_frame
from participation_game.simulate import BotSpec, build_policy, parse_bot_roster
from participation_game.transcript import EventLog, StorageFailure

logger = logging.getLogger(__name__)


def now_ms() -> int:
    return int(time.time() * 1000)


class SocketClient:
    """One websocket connection; owns a FIFO outbound queue."""

    def __init__(self, ws: WebSocket):
        self.ws = ws
        self.player_id: Optional[str] = None
        self.game_id: Optional[str] = None
        self.inbound_count = 0
        self.queue: asyncio.Queue = asyncio.Queue()
        self.sender: Optional[asyncio.Task] = None

    def start_sender(self) -> None:
        self.sender = asyncio.create_task(self._send_loop())

    async def _send_loop(self) -> None:
        try:
            while True:
                frame = await self.queue.get()
                await self.ws.send_text(json.dumps(frame, ensure_ascii=False))
        except Exception:
            pass  # reader loop handles the disconnect

    def push(self, frame: dict) -> None:
        self.queue.put_nowait(frame)

    async def stop(self) -> None:
        if self.sender is not None:
            self.sender.cancel()


class BotWorker:
    """Feeds broadcast frames to one bot adapter off the game loop."""

    def __init__(self, runtime: "GameRuntime", adapter: BotAdapter):
        self.runtime = runtime
        self.adapter = adapter
        self.frames: asyncio.Queue = asyncio.Queue()
        self.task: Optional[asyncio.Task] = None

    @property
    def player_id(self) -> Optional[str]:
        return self.adapter.player_id

    def start(self) -> None:
        self.task = asyncio.create_task(self._run())

    async def _run(self) -> None:
        while True:
            frame = await self.frames.get()
            try:
                actions = await asyncio.to_thread(self.adapter.on_frame, frame)
            except Exception:
                logger.exception("bot %s failed on frame", self.adapter.display_name)
                continue
            for ftype, payload in actions:
                await self.runtime.queue.put(("bot_frame", self, ftype, payload))

    def stop(self) -> None:
        if self.task is not None:
            self.task.cancel()


class GameRuntime:
    """Single-writer event loop around one GameSession."""

    def __init__(self, hub: "GameHub", game_id: str):
        self.hub = hub
        self.game_id = game_id
        writer = None
        if hub.log_dir is not None:
            writer = EventLog.open(Path(hub.log_dir) / f"{game_id}.jsonl")
        self.session = GameSession(
            game_id,
            hub.game_config,
            writer,
            created_ms=now_ms(),
            lobby_grace_seconds=hub.lobby_grace_seconds,
        )
        self.queue: asyncio.Queue = asyncio.Queue()
        self.sockets: dict[str, SocketClient] = {}
        self.bots: list[BotWorker] = []
        self.paused = False
        self.task: Optional[asyncio.Task] = None

    def start(self) -> None:
        self.task = asyncio.create_task(self._run())
        self.task.add_done_callback(self._log_task_exit)
        for slot, spec in enumerate(self.hub.bot_specs):
            policy = build_policy(spec, slot, self.hub.game_config.rng_seed, self.hub.endpoint)
            worker = BotWorker(self, BotAdapter(policy))
            self.bots.append(worker)
            worker.start()
            self.queue.put_nowait(("bot_join", worker))

    def _log_task_exit(self, task: asyncio.Task) -> None:
        if not task.cancelled() and task.exception() is not None:
            logger.error("%s: game loop crashed", self.game_id, exc_info=task.exception())

    async def _run(self) -> None:
        while True:
            deadline = self.session.next_deadline_ms() if not self.paused else None
            timeout = None if deadline is None else max(0.0, (deadline - now_ms()) / 1000)
            try:
                item = await asyncio.wait_for(self.queue.get(), timeout)
            except asyncio.TimeoutError:
                item = None
            try:
                outbound = self._process(item)
            except StorageFailure:
                logger.exception("%s: transcript storage failed; game paused", self.game_id)
                self.paused = True
                self._deliver(
                    [
                        (
                            proto.BROADCAST,
                            error_frame(self.game_id, "StorageFailure", "transcript storage failed; game paused"),
                        )
                    ]
                )
                continue
            self._deliver(outbound)

    def _process(self, item) -> list:
        if self.paused:
            if item is not None and item[0] in ("frame", "join"):
                client = item[1]
                client.push(error_frame(self.game_id, "StorageFailure", "game is paused"))
            return []
        now = now_ms()
        outbound: list = []
        if item is not None:
            kind = item[0]
            if kind == "join":
                _, client, payload = item
                outbound.extend(self._handle_join(client, payload, now))
            elif kind == "bot_join":
                _, worker = item
                try:
                    participant, out = self.session.join(
                        worker.adapter.display_name, "ARTIFICIAL", now
                    )
                except (SessionError, GameError) as exc:
                    logger.warning("%s: bot join rejected: %s", self.game_id, exc)
                else:
                    for target, frame in out:
                        # The worker learns its id from WELCOME, so the
                        # private frame is routed here by construction.
                        if target == participant.id:
                            worker.frames.put_nowait(frame)
                        else:
                            outbound.append((target, frame))
            elif kind == "frame":
                _, client, ftype, payload = item
                if client.player_id is None:
                    client.push(error_frame(self.game_id, "UnknownPlayer", "join first", client.inbound_count))
                else:
                    try:
                        outbound.extend(
                            self.session.handle_frame(client.player_id, ftype, payload, now)
                        )
                    except (SessionError, GameError) as exc:
                        code = getattr(exc, "code", "GameError")
                        client.push(
                            error_frame(self.game_id, code, str(exc), client.inbound_count)
                        )
            elif kind == "bot_frame":
                _, worker, ftype, payload = item
                if worker.player_id is not None:
                    try:
                        outbound.extend(
                            self.session.handle_frame(worker.player_id, ftype, payload, now)
                        )
                    except (SessionError, GameError) as exc:
                        logger.warning(
                            "%s: bot %s frame %s rejected: %s",
                            self.game_id,
                            worker.adapter.display_name,
                            ftype,
                            exc,
                        )
            elif kind == "leave":
                _, player_id = item
                try:
                    outbound.extend(self.session.leave(player_id, now))
                except (SessionError, GameError):
                    pass
        outbound.extend(self.session.tick(now_ms()))
        return outbound

    def _handle_join(self, client: SocketClient, payload: dict, now: int) -> list:
        name = payload.get("name", "")
        kind = payload.get("kind", "")
        token = payload.get("token")
        try:
            participant, out = self.session.join(name, kind, now, token=token)
        except (SessionError, GameError) as exc:
            code = getattr(exc, "code", "GameError")
            client.push(error_frame(self.game_id, code, str(exc), client.inbound_count))
            return []
        previous = self.sockets.get(participant.id)
        if previous is not None and previous is not client:
            previous.player_id = None
        client.player_id = participant.id
        client.game_id = self.game_id
        self.sockets[participant.id] = client
        return out

    def _deliver(self, outbound: list) -> None:
        for target, frame in outbound:
            if target == proto.BROADCAST:
                for client in self.sockets.values():
                    client.push(frame)
                for worker in self.bots:
                    worker.frames.put_nowait(frame)
            else:
                client = self.sockets.get(target)
                if client is not None:
                    client.push(frame)
                for worker in self.bots:
                    if worker.player_id == target:
                        worker.frames.put_nowait(frame)

    def drop_socket(self, client: SocketClient) -> None:
        if client.player_id and self.sockets.get(client.player_id) is client:
            del self.sockets[client.player_id]
            self.queue.put_nowait(("leave", client.player_id))

    def stop(self) -> None:
        if self.task is not None:
            self.task.cancel()
        for worker in self.bots:
            worker.stop()


class GameHub:
    """All live games plus the server-wide configuration."""

    def __init__(
        self,
        game_config: Optional[GameConfig] = None,
        log_dir: Optional[Path] = None,
        bots: str = "",
        lobby_grace_seconds: float = 10.0,
        endpoint: Optional[EndpointConfig] = None,
    ):
        self.game_config = game_config or GameConfig()
        self.game_config.validate()
        self.log_dir = log_dir
        self.bot_specs: list[BotSpec] = parse_bot_roster(bots) if bots else []
        self.lobby_grace_seconds = lobby_grace_seconds
        self.endpoint = endpoint
        self.games: dict[str, GameRuntime] = {}

    def runtime(self, game_id: str) -> GameRuntime:
        runtime = self.games.get(game_id)
        if runtime is None:
            runtime = GameRuntime(self, game_id)
            self.games[game_id] = runtime
            runtime.start()
            logger.info("created game %s", game_id)
        return runtime

    def shutdown(self) -> None:
        for runtime in self.games.values():
            runtime.stop()


def create_app(hub: Optional[GameHub] = None, static_dir: Optional[Path] = None) -> FastAPI:
    the_hub = hub or GameHub()

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        the_hub.shutdown()

    app = FastAPI(title="participation game server", lifespan=lifespan)
    app.state.hub = the_hub

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "games": len(app.state.hub.games)}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        client = SocketClient(ws)
        client.start_sender()
        hub: GameHub = app.state.hub
        runtime: Optional[GameRuntime] = None
        try:
            while True:
                text = await ws.receive_text()
                client.inbound_count += 1
                try:
                    msg = json.loads(text)
                    ftype = msg["type"]
                    game_id = str(msg.get("game", "") or "")
                    payload = msg.get("payload") or {}
                except (json.JSONDecodeError, KeyError, TypeError):
                    client.push(error_frame("", "MalformedFrame", "frames are JSON objects with type/game/payload", client.inbound_count))
                    continue
                if ftype == proto.JOIN:
                    if not game_id:
                        client.push(error_frame("", "MalformedFrame", "JOIN requires a game id", client.inbound_count))
                        continue
                    runtime = hub.runtime(game_id)
                    await runtime.queue.put(("join", client, payload))
                elif ftype == proto.LEAVE:
                    if runtime is not None and client.player_id is not None:
                        await runtime.queue.put(("leave", client.player_id))
                elif ftype in proto.INBOUND_TYPES:
                    if runtime is None:
                        client.push(error_frame(game_id, "UnknownPlayer", "join first", client.inbound_count))
                    else:
                        await runtime.queue.put(("frame", client, ftype, payload))
                else:
                    client.push(error_frame(game_id, "MalformedFrame", f"unknown frame type {ftype!r}", client.inbound_count))
        except WebSocketDisconnect:
            pass
        finally:
            await client.stop()
            if runtime is not None:
                runtime.drop_socket(client)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app
