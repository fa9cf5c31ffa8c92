"""Headless seeded tournaments.

Games run on a virtual clock: bot actions are applied at the moment the
triggering frame was emitted, and once no actions are pending the clock
jumps straight to the next deadline. Phase timers therefore cost no wall
time, and a plan replays byte-for-byte under the same seed (per-game seeds
are ``seed + game_index``; per-slot bot seeds derive from the game seed).
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from participation_game import session as proto
from participation_game import stats as stats_mod
from participation_game.bots import BotAdapter, BotPolicy, ContrarianBot, LexiconBot, PassiveBot, RandomBot
from participation_game.core import Game, GameConfig, GameError, Kind, derive_seed
from participation_game.lexicon import Lexicon, fixture_lexicon, load_lexicon
from participation_game.llm import EndpointConfig, LlmBot
from participation_game.session import GameSession, SessionError
from participation_game.transcript import EventLog, replay

logger = logging.getLogger(__name__)

DEFAULT_BOTS = "lexicon,lexicon:keep=0.85,lexicon:keep=0.7,contrarian:keep=0.8,random"


class InvalidPlan(Exception):
    pass


@dataclass
class BotSpec:
    """One roster slot: a policy name plus colon-separated options.

    Grammar: ``policy[:key=value]...`` with policies lexicon | contrarian |
    random | passive | llm. Options: ``name=``, ``lexicon=<path>``,
    ``keep=<0..1>`` (deterministic lexicon thinning), ``max_challenges=<n>``
    (contrarian appetite). Example: ``contrarian:keep=0.8:name=Critic``.
    """

    policy: str
    name: Optional[str] = None
    lexicon_path: Optional[str] = None
    keep: float = 1.0
    max_challenges: int = 6

    @classmethod
    def parse(cls, text: str) -> "BotSpec":
        head, *options = [part.strip() for part in text.strip().split(":")]
        spec = cls(policy=head.lower())
        if spec.policy not in ("lexicon", "contrarian", "random", "passive", "llm"):
            raise InvalidPlan(f"unknown bot policy {head!r}")
        for pair in options:
            key, sep, value = pair.partition("=")
            if not sep:
                raise InvalidPlan(f"bad bot option {pair!r}")
            key, value = key.strip(), value.strip()
            try:
                if key == "name":
                    spec.name = value
                elif key == "lexicon":
                    spec.lexicon_path = value
                elif key == "keep":
                    spec.keep = float(value)
                elif key == "max_challenges":
                    spec.max_challenges = int(value)
                else:
                    raise InvalidPlan(f"unknown bot option {key!r}")
            except ValueError as exc:
                raise InvalidPlan(f"bad value for {key!r}: {value!r}") from exc
        return spec


def parse_bot_roster(text: str) -> list[BotSpec]:
    """Comma-separated roster of bot specs."""
    return [BotSpec.parse(part) for part in text.split(",") if part.strip()]


@dataclass
class SimulationPlan:
    games: int = 1
    seed: int = 0
    bots: list[BotSpec] = field(default_factory=lambda: parse_bot_roster(DEFAULT_BOTS))
    config: GameConfig = field(default_factory=GameConfig)
    out_dir: Optional[Path] = None
    endpoint: Optional[EndpointConfig] = None

    def validate(self) -> None:
        if self.games < 1:
            raise InvalidPlan("games must be at least 1")
        n = len(self.bots)
        if not self.config.min_players <= n <= self.config.max_players:
            raise InvalidPlan(
                f"roster of {n} outside [{self.config.min_players}, {self.config.max_players}]"
            )
        try:
            self.config.validate()
        except Exception as exc:
            raise InvalidPlan(str(exc)) from exc


@dataclass
class SimulationSummary:
    games_completed: int
    log_paths: list[Path]
    stats_rows: list
    stats_path: Optional[Path] = None


class ContrarianBotCapped(ContrarianBot):
    """Contrarian with a per-round challenge budget to keep rounds bounded."""

    def __init__(self, display_name: str, lexicon: Lexicon, max_challenges: int):
        super().__init__(display_name, lexicon)
        self.max_challenges = max_challenges

    def decide_challenges(self, ctx):
        return super().decide_challenges(ctx)[: self.max_challenges]


def build_policy(spec: BotSpec, slot: int, game_seed: int, endpoint: Optional[EndpointConfig]) -> BotPolicy:
    name = spec.name or f"{spec.policy}-{slot + 1}"
    lex: Optional[Lexicon] = None
    if spec.policy in ("lexicon", "contrarian"):
        lex = load_lexicon(spec.lexicon_path) if spec.lexicon_path else fixture_lexicon()
        if spec.keep < 1.0:
            # Thinning is keyed by slot, not game, so a bot keeps one
            # vocabulary for the whole tournament.
            lex = lex.subset(spec.keep, seed=derive_seed(0xBEEF, slot))
    if spec.policy == "lexicon":
        return LexiconBot(name, lex)
    if spec.policy == "contrarian":
        return ContrarianBotCapped(name, lex, spec.max_challenges)
    if spec.policy == "random":
        return RandomBot(name, seed=derive_seed(game_seed, slot))
    if spec.policy == "passive":
        return PassiveBot(name)
    if spec.policy == "llm":
        if endpoint is None:
            endpoint = EndpointConfig.from_env()
        return LlmBot(name, endpoint)
    raise InvalidPlan(f"unknown bot policy {spec.policy!r}")


def run_game(
    game_id: str,
    config: GameConfig,
    policies: list[BotPolicy],
    log_path: Optional[Path] = None,
) -> Game:
    """Drive one complete game on the virtual clock; returns terminal state."""
    writer = EventLog.open(log_path) if log_path is not None else None
    counter = iter(range(1, len(policies) + 1))
    session = GameSession(
        game_id,
        config,
        writer,
        created_ms=0,
        lobby_grace_seconds=0.0,
        token_factory=lambda: f"sim-token-{next(counter)}",
    )
    adapters = [BotAdapter(policy) for policy in policies]
    pending: deque[tuple[str, str, dict]] = deque()

    def deliver(outbound: list) -> None:
        for target, frame in outbound:
            for adapter in adapters:
                if target not in (proto.BROADCAST, adapter.player_id):
                    continue
                for ftype, payload in adapter.on_frame(frame):
                    pending.append((adapter.player_id, ftype, payload))

    now = 0
    for adapter in adapters:
        participant, out = session.join(adapter.display_name, Kind.ARTIFICIAL.value, now_ms=now)
        # Route the private WELCOME by id before the adapter knows it.
        for target, frame in out:
            if target == participant.id and frame["type"] == proto.WELCOME:
                adapter.on_frame(frame)
        deliver([(t, f) for t, f in out if t == proto.BROADCAST])

    while not session.game.over:
        while pending:
            player_id, ftype, payload = pending.popleft()
            try:
                deliver(session.handle_frame(player_id, ftype, payload, now))
            except (SessionError, GameError) as exc:
                # Sanitized bots should rarely get here; a rejected frame is
                # dropped so one bad actor cannot stall the table.
                logger.warning("%s: dropped %s frame (%s)", game_id, ftype, exc)
        if session.game.over:
            break
        deadline = session.next_deadline_ms()
        if deadline is None:
            raise RuntimeError(f"{game_id}: no pending deadline but game not over")
        now = max(now, deadline)
        deliver(session.tick(now))
    if writer is not None:
        writer.close()
    return session.game


def run_simulation(plan: SimulationPlan) -> SimulationSummary:
    """Run the plan: per-game transcripts, aggregate stats, validated replays."""
    plan.validate()
    log_dir: Optional[Path] = None
    if plan.out_dir is not None:
        log_dir = Path(plan.out_dir) / "games"
        log_dir.mkdir(parents=True, exist_ok=True)
    log_paths: list[Path] = []
    table: dict = {}
    completed = 0
    for index in range(plan.games):
        game_seed = plan.seed + index
        config = replace(plan.config, rng_seed=game_seed)
        policies = [
            build_policy(spec, slot, game_seed, plan.endpoint)
            for slot, spec in enumerate(plan.bots)
        ]
        game_id = f"game-{index + 1:03d}"
        log_path = log_dir / f"{game_id}.jsonl" if log_dir is not None else None
        game = run_game(game_id, config, policies, log_path)
        completed += 1
        if log_path is not None:
            replayed = replay(log_path)
            if replayed.scoreboard != game.scoreboard:
                raise RuntimeError(f"{game_id}: replay disagrees with the live scoreboard")
            log_paths.append(log_path)
            stats_mod.accumulate_game(table, replayed)
        else:
            stats_mod.accumulate_game(table, game)
    rows = [table[key] for key in sorted(table)]
    stats_path = None
    if plan.out_dir is not None:
        stats_path = Path(plan.out_dir) / "stats.json"
        stats_path.write_text(stats_mod.render_json(rows), encoding="utf-8")
    return SimulationSummary(
        games_completed=completed,
        log_paths=log_paths,
        stats_rows=rows,
        stats_path=stats_path,
    )
