"""Operator entry points: host a server, run seeded bot tournaments, replay
and analyze transcripts, and serve a stub completion endpoint."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
from pathlib import Path
from typing import Optional

from participation_game.core import GameConfig
from participation_game.simulate import DEFAULT_BOTS, InvalidPlan, SimulationPlan, parse_bot_roster
from participation_game.stats import compute_stats, render_csv, render_json
from participation_game.transcript import CorruptLog, replay

logger = logging.getLogger(__name__)


def load_game_config(path: Optional[str]) -> GameConfig:
    if path is None:
        return GameConfig()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return GameConfig.from_dict(data)


def _split_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise SystemExit(f"--bind must be host:port, got {bind!r}")
    return host, int(port)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from participation_game.server import GameHub, create_app

    config = load_game_config(args.config)
    log_dir = Path(args.log_dir) if args.log_dir else None
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
    hub = GameHub(
        game_config=config,
        log_dir=log_dir,
        bots=args.bots or "",
        lobby_grace_seconds=args.lobby_grace,
    )
    static_dir = Path(args.static) if args.static else None
    app = create_app(hub, static_dir=static_dir)
    host, port = _split_bind(args.bind)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    from participation_game.simulate import run_simulation

    config = load_game_config(args.config)
    try:
        plan = SimulationPlan(
            games=args.games,
            seed=args.seed,
            bots=parse_bot_roster(args.bots),
            config=config,
            out_dir=Path(args.out) if args.out else None,
        )
        summary = run_simulation(plan)
    except InvalidPlan as exc:
        print(f"invalid plan: {exc}", file=sys.stderr)
        return 2
    print(f"completed {summary.games_completed}/{args.games} games")
    if summary.stats_path is not None:
        print(f"transcripts: {Path(args.out) / 'games'}")
        print(f"stats: {summary.stats_path}")
    else:
        print(render_json(summary.stats_rows), end="")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        game = replay(args.transcript)
    except CorruptLog as exc:
        print(f"corrupt transcript: {exc}", file=sys.stderr)
        return 2
    board = sorted(
        game.scoreboard.items(),
        key=lambda item: (-item[1], game.participants[item[0]].display_name),
    )
    for player_id, score in board:
        participant = game.participants[player_id]
        print(f"{score:5d}  {participant.display_name} [{participant.kind.value}]")
    if game.outcome is not None:
        names = [game.participants[w].display_name for w in game.outcome.winners]
        print("winner(s):", ", ".join(names))
    else:
        print("game unfinished")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    directory = Path(args.directory)
    paths = sorted(directory.rglob("*.jsonl"))
    if not paths:
        print(f"no transcripts under {directory}", file=sys.stderr)
        return 2
    try:
        rows = compute_stats(paths)
    except CorruptLog as exc:
        print(f"corrupt transcript: {exc}", file=sys.stderr)
        return 2
    output = render_csv(rows) if args.format == "csv" else render_json(rows)
    print(output, end="")
    return 0


def cmd_stub_llm(args: argparse.Namespace) -> int:
    from participation_game.lexicon import fixture_lexicon, load_lexicon
    from participation_game.llm import StubEndpoint, echo_responder, lexicon_responder

    if args.mode == "echo":
        responder = echo_responder
    else:
        lex = load_lexicon(args.lexicon) if args.lexicon else fixture_lexicon()
        responder = lexicon_responder(lex)
    host, port = _split_bind(args.bind)
    stub = StubEndpoint(responder, host=host, port=port, fail_all=args.fail)
    stub.start()
    print(f"stub completion endpoint at {stub.url} (mode={args.mode})")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        stub.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="host the websocket game server")
    serve.add_argument("--config", help="game config JSON file")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    serve.add_argument("--log-dir", help="directory for game transcripts")
    serve.add_argument("--bots", help="in-process bot roster joined to every game")
    serve.add_argument("--lobby-grace", type=float, default=10.0, help="seconds to hold a ready lobby open")
    serve.add_argument("--static", help="serve this directory at / (web client build)")
    serve.set_defaults(func=cmd_serve)

    simulate = sub.add_parser("simulate", help="run headless seeded bot games")
    simulate.add_argument("--config", help="game config JSON file")
    simulate.add_argument("--bots", default=DEFAULT_BOTS, help="bot roster spec")
    simulate.add_argument("--games", type=int, default=1)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", help="output directory (games/ and stats.json)")
    simulate.set_defaults(func=cmd_simulate)

    replay_cmd = sub.add_parser("replay", help="replay a transcript and print the scoreboard")
    replay_cmd.add_argument("transcript", help="path to a .jsonl transcript")
    replay_cmd.set_defaults(func=cmd_replay)

    stats_cmd = sub.add_parser("stats", help="aggregate influence statistics over transcripts")
    stats_cmd.add_argument("directory", help="directory containing .jsonl transcripts")
    stats_cmd.add_argument("--format", choices=("json", "csv"), default="json")
    stats_cmd.set_defaults(func=cmd_stats)

    stub = sub.add_parser("stub-llm", help="serve the bundled stub completion endpoint")
    stub.add_argument("--bind", default="127.0.0.1:8100")
    stub.add_argument("--mode", choices=("lexicon", "echo"), default="lexicon")
    stub.add_argument("--lexicon", help="lexicon file for lexicon mode")
    stub.add_argument("--fail", action="store_true", help="force every request to fail")
    stub.set_defaults(func=cmd_stub_llm)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
