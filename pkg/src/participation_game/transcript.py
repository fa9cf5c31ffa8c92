"""Append-only event log and deterministic replay.

Every game evolves exclusively through the events defined here; the live
driver and :func:`replay` share one application path, so a transcript is
sufficient to rebuild the terminal state. Events are line-delimited JSON
objects with exactly the fields ``seq`` / ``ts_ms`` / ``kind`` / ``payload``.
Event 0 records the game id, config, and seed, making logs self-contained.

Payloads carry the inputs of each event plus derived audit fields (drawn
letter, tally counts, score deltas). On replay the audit fields are
recomputed and compared, so a log that disagrees with the rules engine is
reported as corrupt rather than silently reinterpreted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Callable, Iterable, Iterator, Mapping, Optional, Union

from participation_game.core import (
    Ballot,
    Game,
    GameConfig,
    GameError,
    Kind,
    Participant,
    Phase,
    WordRef,
)

EVENT_FIELDS = ("seq", "ts_ms", "kind", "payload")

CONFIG = "config"
JOIN = "join"
LEAVE = "leave"
REJOIN = "rejoin"
OPEN_ROUND = "open_round"
SUBMIT = "submit"
CLOSE_SUBMISSIONS = "close_submissions"
CHALLENGE = "challenge"
CLOSE_REVEAL = "close_reveal"
ARGUMENT = "argument"
CLOSE_DEBATE = "close_debate"
VOTE = "vote"
CLOSE_VOTING = "close_voting"
GAME_OVER = "game_over"


class SequenceGap(Exception):
    """An appended event does not continue the gapless sequence."""


class StorageFailure(Exception):
    """The underlying log storage rejected a write."""


class CorruptLog(Exception):
    """A log failed parsing or validation; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EventLog:
    """Writer for one game's transcript.

    Appends are flushed before the caller releases the corresponding
    broadcast, so anything a client saw is already on disk.
    """

    def __init__(self, stream: IO[str], close_stream: bool = True):
        self._stream = stream
        self._close_stream = close_stream
        self._next_seq = 0

    @classmethod
    def open(cls, path: Union[str, Path]) -> "EventLog":
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return cls(path.open("w", encoding="utf-8"))

    @property
    def next_seq(self) -> int:
        return self._next_seq

    def append(self, event: Mapping) -> None:
        if event["seq"] != self._next_seq:
            raise SequenceGap(f"expected seq {self._next_seq}, got {event['seq']}")
        try:
            self._stream.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._stream.flush()
        except (OSError, ValueError) as exc:
            raise StorageFailure(str(exc)) from exc
        self._next_seq += 1

    def close(self) -> None:
        if self._close_stream:
            self._stream.close()


def make_event(seq: int, ts_ms: int, kind: str, payload: dict) -> dict:
    return {"seq": seq, "ts_ms": ts_ms, "kind": kind, "payload": payload}


# -- event application ------------------------------------------------------
#
# Each applier takes the input fields of its payload, drives the rules
# engine, and returns the canonical payload (inputs plus audit fields).
# The live driver records that payload; replay rebuilds it and compares.


def _scored_payload(game: Game) -> Optional[dict]:
    round_state = game.rounds[-1]
    if round_state.phase is not Phase.SCORED:
        return None
    return {
        "events": [e.to_dict() for e in round_state.score_events],
        "board": dict(game.scoreboard),
    }


def _apply_config(game: Optional[Game], payload: Mapping) -> tuple[Game, dict]:
    if game is not None:
        raise GameError("config event after game creation")
    config = GameConfig.from_dict(payload["config"])
    return Game(config), {"game_id": payload["game_id"], "config": config.to_dict()}


def _apply_join(game: Game, payload: Mapping) -> tuple[Game, dict]:
    participant = Participant(
        id=payload["id"], display_name=payload["name"], kind=Kind(payload["kind"])
    )
    game.add_participant(participant)
    return game, {"id": participant.id, "name": participant.display_name, "kind": participant.kind.value}


def _apply_leave(game: Game, payload: Mapping) -> tuple[Game, dict]:
    game.set_connected(payload["id"], False)
    return game, {"id": payload["id"]}


def _apply_rejoin(game: Game, payload: Mapping) -> tuple[Game, dict]:
    game.set_connected(payload["id"], True)
    return game, {"id": payload["id"]}


def _apply_open_round(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    round_state = game.open_round(now_ms)
    return game, {
        "now_ms": now_ms,
        "round": round_state.round_number,
        "letter": round_state.letter,
        "deadline_ms": round_state.deadline_ms,
    }


def _apply_submit(game: Game, payload: Mapping) -> tuple[Game, dict]:
    entries = [(int(e["category"]), str(e["word"])) for e in payload["entries"]]
    game.accept_submission(payload["player_id"], entries, payload["now_ms"])
    return game, {
        "now_ms": payload["now_ms"],
        "player_id": payload["player_id"],
        "entries": [{"category": c, "word": w} for c, w in entries],
    }


def _apply_close_submissions(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    auto_rejected = game.close_submissions(now_ms)
    return game, {
        "now_ms": now_ms,
        "deadline_ms": game.rounds[-1].deadline_ms,
        "auto_rejected": [ref.to_dict() for ref in auto_rejected],
    }


def _apply_challenge(game: Game, payload: Mapping) -> tuple[Game, dict]:
    ref = WordRef.from_dict(payload["ref"])
    game.raise_challenge(payload["challenger_id"], ref)
    return game, {"challenger_id": payload["challenger_id"], "ref": ref.to_dict()}


def _apply_close_reveal(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    game.close_reveal(now_ms)
    round_state = game.rounds[-1]
    scored = _scored_payload(game)
    return game, {
        "now_ms": now_ms,
        "contested": [ref.to_dict() for ref in round_state.contested_queue],
        "scored": scored,
        "deadline_ms": None if scored else round_state.deadline_ms,
    }


def _apply_argument(game: Game, payload: Mapping) -> tuple[Game, dict]:
    ref = WordRef.from_dict(payload["ref"])
    argument = game.record_argument(payload["author_id"], ref, payload["text"])
    return game, {
        "author_id": argument.author,
        "ref": ref.to_dict(),
        "text": argument.text,
        "seq": argument.seq,
    }


def _apply_close_debate(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    ref = game.close_debate(now_ms)
    return game, {
        "now_ms": now_ms,
        "ref": ref.to_dict(),
        "deadline_ms": game.rounds[-1].deadline_ms,
    }


def _apply_vote(game: Game, payload: Mapping) -> tuple[Game, dict]:
    ref = WordRef.from_dict(payload["ref"])
    game.cast_vote(payload["voter_id"], ref, Ballot(payload["choice"]))
    return game, {
        "voter_id": payload["voter_id"],
        "ref": ref.to_dict(),
        "choice": payload["choice"],
    }


def _apply_close_voting(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    result = game.close_voting(now_ms)
    round_state = game.rounds[-1]
    scored = _scored_payload(game)
    return game, {
        "now_ms": now_ms,
        "ref": result.ref.to_dict(),
        "approve": result.approve,
        "reject": result.reject,
        "outcome": result.status.value,
        "scored": scored,
        "deadline_ms": None if scored else round_state.deadline_ms,
    }


def _apply_game_over(game: Game, payload: Mapping) -> tuple[Game, dict]:
    now_ms = payload["now_ms"]
    outcome = game.check_termination(now_ms)
    if outcome is None:
        raise GameError("no termination condition holds")
    game.finish(outcome)
    return game, {
        "now_ms": now_ms,
        "ranking": outcome.ranking,
        "winners": outcome.winners,
        "board": dict(game.scoreboard),
    }


_APPLIERS: dict[str, Callable] = {
    CONFIG: _apply_config,
    JOIN: _apply_join,
    LEAVE: _apply_leave,
    REJOIN: _apply_rejoin,
    OPEN_ROUND: _apply_open_round,
    SUBMIT: _apply_submit,
    CLOSE_SUBMISSIONS: _apply_close_submissions,
    CHALLENGE: _apply_challenge,
    CLOSE_REVEAL: _apply_close_reveal,
    ARGUMENT: _apply_argument,
    CLOSE_DEBATE: _apply_close_debate,
    VOTE: _apply_vote,
    CLOSE_VOTING: _apply_close_voting,
    GAME_OVER: _apply_game_over,
}


def apply_payload(game: Optional[Game], kind: str, inputs: Mapping) -> tuple[Game, dict]:
    """Apply one event's inputs to the game; returns the canonical payload."""
    applier = _APPLIERS.get(kind)
    if applier is None:
        raise GameError(f"unknown event kind {kind!r}")
    return applier(game, inputs)


def apply_event(game: Optional[Game], event: Mapping, strict: bool = True) -> Game:
    """Replay one recorded event; in strict mode audit fields must match."""
    game, rebuilt = apply_payload(game, event["kind"], event["payload"])
    if strict and rebuilt != event["payload"]:
        raise GameError(
            f"recorded payload for {event['kind']} does not match the replayed outcome"
        )
    return game


# -- reading and replay ------------------------------------------------------


def read_events(path: Union[str, Path]) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, event) pairs; CorruptLog on any bad line."""
    with Path(path).open("r", encoding="utf-8") as stream:
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                raise CorruptLog(line_no, "blank line")
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptLog(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(event, dict) or set(EVENT_FIELDS) - set(event):
                raise CorruptLog(line_no, "event must carry seq/ts_ms/kind/payload")
            yield line_no, event


def replay_events(events: Iterable[tuple[int, Mapping]]) -> Game:
    game: Optional[Game] = None
    expected_seq = 0
    for line_no, event in events:
        if event["seq"] != expected_seq:
            raise CorruptLog(line_no, f"expected seq {expected_seq}, got {event['seq']}")
        expected_seq += 1
        try:
            game = apply_event(game, event)
        except (GameError, KeyError, ValueError, TypeError) as exc:
            raise CorruptLog(line_no, f"{event.get('kind', '?')}: {exc}") from exc
    if game is None:
        # An empty transcript is an empty lobby under default rules.
        return Game(GameConfig())
    return game


def replay(path: Union[str, Path]) -> Game:
    """Rebuild the terminal game state from a transcript file."""
    return replay_events(read_events(path))
