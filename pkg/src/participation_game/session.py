"""Per-game driver shared by the live server and the headless simulator.

A :class:`GameSession` owns one game: it validates inbound frames, applies
them as transcript events (write-ahead of any broadcast), fires deadline
transitions, and emits the outbound frames described in the protocol. It is
synchronous and clock-free; callers supply ``now_ms`` for every input, which
is what lets the simulator drive it with a virtual clock while the server
uses wall time, with identical results for identical event orders.

All callers of one session must serialize their calls (the server does this
with a per-game queue; the simulator is single-threaded).
"""

from __future__ import annotations

import secrets
from typing import Callable, Mapping, Optional

from participation_game import transcript
from participation_game.core import (
    Game,
    GameConfig,
    Kind,
    Participant,
    Phase,
    RoundState,
    WordRef,
    WrongPhase,
)
from participation_game.transcript import EventLog, make_event

# Inbound frame types.
JOIN = "JOIN"
SUBMIT_WORDS = "SUBMIT_WORDS"
CHALLENGE = "CHALLENGE"
ARGUMENT = "ARGUMENT"
VOTE = "VOTE"
LEAVE = "LEAVE"

INBOUND_TYPES = (JOIN, SUBMIT_WORDS, CHALLENGE, ARGUMENT, VOTE, LEAVE)

# Outbound frame types.
WELCOME = "WELCOME"
ROSTER = "ROSTER"
ROUND_START = "ROUND_START"
REVEAL = "REVEAL"
DEBATE_OPEN = "DEBATE_OPEN"
ARGUMENT_ECHO = "ARGUMENT"
VOTE_OPEN = "VOTE_OPEN"
TALLY = "TALLY"
SCORES = "SCORES"
GAME_OVER = "GAME_OVER"
ERROR = "ERROR"

BROADCAST = "*"


class SessionError(Exception):
    """Protocol-level rejection; ``code`` mirrors GameError codes on the wire."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def error_frame(game_id: str, code: str, message: str, ref_seq: Optional[int] = None) -> dict:
    return {
        "type": ERROR,
        "game": game_id,
        "seq": None,
        "payload": {"code": code, "message": message, "ref_seq": ref_seq},
    }


class GameSession:
    """One game's ordered input/output machine."""

    def __init__(
        self,
        game_id: str,
        config: GameConfig,
        writer: Optional[EventLog] = None,
        *,
        created_ms: int = 0,
        lobby_grace_seconds: float = 10.0,
        token_factory: Optional[Callable[[], str]] = None,
    ):
        self.game_id = game_id
        self.writer = writer
        self._event_seq = 0
        self.broadcast_seq = 0
        self.lobby_grace_ms = int(lobby_grace_seconds * 1000)
        self.lobby_deadline_ms: Optional[int] = None
        self._token_factory = token_factory or (lambda: secrets.token_urlsafe(16))
        self._token_to_player: dict[str, str] = {}
        self.player_tokens: dict[str, str] = {}
        self.game: Optional[Game] = None
        self._record(created_ms, transcript.CONFIG, {"game_id": game_id, "config": config.to_dict()})

    # -- event plumbing -------------------------------------------------

    def _record(self, ts_ms: int, kind: str, inputs: Mapping) -> dict:
        """Apply one event and append it to the log before any broadcast."""
        self.game, payload = transcript.apply_payload(self.game, kind, inputs)
        event = make_event(self._event_seq, ts_ms, kind, payload)
        self._event_seq += 1
        if self.writer is not None:
            self.writer.append(event)
        return payload

    def _broadcast(self, out: list, ftype: str, payload: dict) -> None:
        self.broadcast_seq += 1
        out.append(
            (BROADCAST, {"type": ftype, "game": self.game_id, "seq": self.broadcast_seq, "payload": payload})
        )

    def _to_player(self, out: list, player_id: str, ftype: str, payload: dict) -> None:
        out.append(
            (player_id, {"type": ftype, "game": self.game_id, "seq": None, "payload": payload})
        )

    # -- joining ---------------------------------------------------------

    def join(
        self, name: str, kind: str, now_ms: int, token: Optional[str] = None
    ) -> tuple[Participant, list]:
        """Register a participant, or resume one via its reconnect token."""
        out: list = []
        if token is not None and token in self._token_to_player:
            player_id = self._token_to_player[token]
            self._record(now_ms, transcript.REJOIN, {"id": player_id})
            participant = self.game.participants[player_id]
        else:
            if self.game.started or self.game.over:
                raise SessionError(
                    "GameStartedNoToken",
                    "the game has started; reconnecting requires a valid token",
                )
            if not isinstance(name, str) or not name.strip():
                raise SessionError("MalformedFrame", "display name must be a nonempty string")
            try:
                declared = Kind(kind)
            except ValueError:
                raise SessionError("MalformedFrame", f"kind must be one of {[k.value for k in Kind]}")
            player_id = f"p{len(self.game.participants) + 1}"
            self._record(
                now_ms,
                transcript.JOIN,
                {"id": player_id, "name": name.strip(), "kind": declared.value},
            )
            participant = self.game.participants[player_id]
            token = self._token_factory()
            self._token_to_player[token] = player_id
            self.player_tokens[player_id] = token
        self._to_player(out, player_id, WELCOME, self._welcome_payload(participant, now_ms))
        self._broadcast(out, ROSTER, self._roster_payload())
        self._after_roster_change(now_ms, out)
        return participant, out

    def leave(self, player_id: str, now_ms: int) -> list:
        out: list = []
        if player_id not in self.game.participants:
            raise SessionError("UnknownPlayer", f"no participant {player_id!r}")
        if not self.game.participants[player_id].connected:
            return out
        self._record(now_ms, transcript.LEAVE, {"id": player_id})
        self._broadcast(out, ROSTER, self._roster_payload())
        self._after_roster_change(now_ms, out)
        return out

    def _welcome_payload(self, participant: Participant, now_ms: int) -> dict:
        return {
            "player_id": participant.id,
            "token": self.player_tokens.get(participant.id),
            "config": self.game.config.to_dict(),
            "roster": self._roster_payload()["players"],
            "now_ms": now_ms,
            "last_seq": self.broadcast_seq,
            "state": self.snapshot(participant.id),
        }

    def _roster_payload(self) -> dict:
        round_state = self.game.current_round
        submitting = round_state is not None and round_state.phase is Phase.SUBMISSION
        players = []
        for participant in self.game.participants.values():
            row = participant.to_dict()
            row["submitted"] = submitting and participant.id in round_state.submitted
            players.append(row)
        return {"players": players}

    # -- inbound frames ----------------------------------------------------

    def handle_frame(self, player_id: str, ftype: str, payload: Mapping, now_ms: int) -> list:
        """Apply one valid inbound frame; raises SessionError/GameError."""
        if player_id not in self.game.participants:
            raise SessionError("UnknownPlayer", "join the game first")
        if not isinstance(payload, Mapping):
            raise SessionError("MalformedFrame", "payload must be an object")
        out: list = []
        if ftype == SUBMIT_WORDS:
            self._handle_submit(player_id, payload, now_ms, out)
        elif ftype == CHALLENGE:
            self._handle_challenge(player_id, payload, now_ms, out)
        elif ftype == ARGUMENT:
            self._handle_argument(player_id, payload, now_ms, out)
        elif ftype == VOTE:
            self._handle_vote(player_id, payload, now_ms, out)
        else:
            raise SessionError("MalformedFrame", f"unknown frame type {ftype!r}")
        return out

    def _current_round_checked(self, payload: Mapping) -> RoundState:
        round_state = self.game.current_round
        if round_state is None:
            raise WrongPhase("no round in progress")
        if "round" in payload and int(payload["round"]) != round_state.round_number:
            raise WrongPhase(
                f"frame targets round {payload['round']}, current is {round_state.round_number}"
            )
        return round_state

    def _handle_submit(self, player_id: str, payload: Mapping, now_ms: int, out: list) -> None:
        self._current_round_checked(payload)
        raw_entries = payload.get("entries")
        if not isinstance(raw_entries, list):
            raise SessionError("MalformedFrame", "entries must be a list")
        entries = []
        for item in raw_entries:
            try:
                entries.append({"category": int(item["category"]), "word": str(item["word"])})
            except (KeyError, TypeError, ValueError):
                raise SessionError("MalformedFrame", "each entry needs category and word")
        self._record(
            now_ms,
            transcript.SUBMIT,
            {"now_ms": now_ms, "player_id": player_id, "entries": entries},
        )
        self._broadcast(out, ROSTER, self._roster_payload())
        round_state = self.game.current_round
        connected = {
            pid
            for pid in round_state.players
            if self.game.participants[pid].connected
        }
        if connected and connected <= round_state.submitted:
            self._close_submissions(now_ms, out)

    def _handle_challenge(self, player_id: str, payload: Mapping, now_ms: int, out: list) -> None:
        round_state = self._current_round_checked(payload)
        try:
            ref = WordRef(
                round=int(payload["round"]),
                author=str(payload["author"]),
                category=int(payload["category"]),
            )
        except (KeyError, TypeError, ValueError):
            raise SessionError("MalformedFrame", "challenge needs round, author, category")
        self._record(now_ms, transcript.CHALLENGE, {"challenger_id": player_id, "ref": ref.to_dict()})
        if round_state.phase is Phase.REVEAL:
            self._broadcast(out, REVEAL, self._reveal_payload())

    def _handle_argument(self, player_id: str, payload: Mapping, now_ms: int, out: list) -> None:
        try:
            ref = WordRef.from_dict(payload["word_ref"])
            text = str(payload["text"])
        except (KeyError, TypeError, ValueError):
            raise SessionError("MalformedFrame", "argument needs word_ref and text")
        recorded = self._record(
            now_ms,
            transcript.ARGUMENT,
            {"author_id": player_id, "ref": ref.to_dict(), "text": text},
        )
        self._broadcast(
            out,
            ARGUMENT_ECHO,
            {
                "word_ref": ref.to_dict(),
                "author_id": player_id,
                "text": text,
                "seq": recorded["seq"],
            },
        )

    def _handle_vote(self, player_id: str, payload: Mapping, now_ms: int, out: list) -> None:
        try:
            ref = WordRef.from_dict(payload["word_ref"])
            choice = str(payload["choice"])
        except (KeyError, TypeError, ValueError):
            raise SessionError("MalformedFrame", "vote needs word_ref and choice")
        if choice not in ("APPROVE", "REJECT"):
            raise SessionError("MalformedFrame", "choice must be APPROVE or REJECT")
        # Ballots stay private until the tally; no broadcast here.
        self._record(
            now_ms,
            transcript.VOTE,
            {"voter_id": player_id, "ref": ref.to_dict(), "choice": choice},
        )

    # -- deadline transitions ------------------------------------------------

    def next_deadline_ms(self) -> Optional[int]:
        if self.game.over:
            return None
        if not self.game.started:
            return self.lobby_deadline_ms
        round_state = self.game.current_round
        return round_state.deadline_ms if round_state is not None else None

    def tick(self, now_ms: int) -> list:
        """Fire every transition whose deadline has passed; no-op otherwise."""
        out: list = []
        self._advance(now_ms, out)
        return out

    def _after_roster_change(self, now_ms: int, out: list) -> None:
        if self.game.started or self.game.over:
            return
        if not self._lobby_ready():
            self.lobby_deadline_ms = None
            return
        if len(self.game.participants) >= self.game.config.max_players:
            self._open_round(now_ms, out)
        elif self.lobby_deadline_ms is None:
            self.lobby_deadline_ms = now_ms + self.lobby_grace_ms

    def _lobby_ready(self) -> bool:
        connected = [p for p in self.game.participants.values() if p.connected]
        return len(connected) >= self.game.config.min_players and any(
            p.kind is Kind.ARTIFICIAL for p in connected
        )

    def _advance(self, now_ms: int, out: list) -> None:
        while not self.game.over:
            if not self.game.started:
                if (
                    self.lobby_deadline_ms is not None
                    and now_ms >= self.lobby_deadline_ms
                    and self._lobby_ready()
                ):
                    self._open_round(now_ms, out)
                    continue
                return
            round_state = self.game.current_round
            if round_state is None or now_ms < round_state.deadline_ms:
                return
            if round_state.phase is Phase.SUBMISSION:
                self._close_submissions(now_ms, out)
            elif round_state.phase is Phase.REVEAL:
                self._close_reveal(now_ms, out)
            elif round_state.phase is Phase.DEBATE:
                self._close_debate(now_ms, out)
            elif round_state.phase is Phase.VOTING:
                self._close_voting(now_ms, out)

    def _open_round(self, now_ms: int, out: list) -> None:
        self.lobby_deadline_ms = None
        payload = self._record(now_ms, transcript.OPEN_ROUND, {"now_ms": now_ms})
        self._broadcast(
            out,
            ROUND_START,
            {
                "round": payload["round"],
                "letter": payload["letter"],
                "deadline": payload["deadline_ms"],
                "categories": list(self.game.config.categories),
            },
        )

    def _close_submissions(self, now_ms: int, out: list) -> None:
        self._record(now_ms, transcript.CLOSE_SUBMISSIONS, {"now_ms": now_ms})
        self._broadcast(out, REVEAL, self._reveal_payload())

    def _close_reveal(self, now_ms: int, out: list) -> None:
        payload = self._record(now_ms, transcript.CLOSE_REVEAL, {"now_ms": now_ms})
        if payload["scored"] is not None:
            self._emit_scores(out, payload["scored"])
            self._finish_or_continue(now_ms, out)
        else:
            self._emit_debate_open(out)

    def _close_debate(self, now_ms: int, out: list) -> None:
        payload = self._record(now_ms, transcript.CLOSE_DEBATE, {"now_ms": now_ms})
        self._broadcast(
            out, VOTE_OPEN, {"word_ref": payload["ref"], "deadline": payload["deadline_ms"]}
        )

    def _close_voting(self, now_ms: int, out: list) -> None:
        payload = self._record(now_ms, transcript.CLOSE_VOTING, {"now_ms": now_ms})
        self._broadcast(
            out,
            TALLY,
            {
                "word_ref": payload["ref"],
                "approve": payload["approve"],
                "reject": payload["reject"],
                "outcome": payload["outcome"],
            },
        )
        if payload["scored"] is not None:
            self._emit_scores(out, payload["scored"])
            self._finish_or_continue(now_ms, out)
        else:
            self._emit_debate_open(out)

    def _finish_or_continue(self, now_ms: int, out: list) -> None:
        outcome = self.game.check_termination(now_ms)
        if outcome is None:
            self._open_round(now_ms, out)
            return
        payload = self._record(now_ms, transcript.GAME_OVER, {"now_ms": now_ms})
        self._broadcast(
            out,
            GAME_OVER,
            {
                "ranking": payload["ranking"],
                "winners": payload["winners"],
                "board": payload["board"],
            },
        )

    def _emit_scores(self, out: list, scored: dict) -> None:
        round_state = self.game.rounds[-1]
        self._broadcast(
            out,
            SCORES,
            {"round": round_state.round_number, "board": scored["board"], "events": scored["events"]},
        )

    def _emit_debate_open(self, out: list) -> None:
        round_state = self.game.current_round
        ref = round_state.current_ref()
        entry = round_state.entry(ref)
        self._broadcast(
            out,
            DEBATE_OPEN,
            {
                "word_ref": ref.to_dict(),
                "author_id": ref.author,
                "challengers": list(round_state.challengers.get(ref, [])),
                "word": entry.raw,
                "category_index": ref.category,
                "deadline": round_state.deadline_ms,
                "position": round_state.cursor + 1,
                "total": len(round_state.contested_queue),
            },
        )

    # -- views -----------------------------------------------------------

    def _reveal_payload(self) -> dict:
        round_state = self.game.rounds[-1]
        return {
            "round": round_state.round_number,
            "letter": round_state.letter,
            "entries": self._entries_payload(round_state),
            "deadline": round_state.deadline_ms,
        }

    def _entries_payload(self, round_state: RoundState) -> list:
        entries = []
        for player_id in round_state.players:
            slots = round_state.submissions.get(player_id, {})
            for category in sorted(slots):
                entries.append(slots[category].to_dict(round_state.round_number))
        return entries

    def snapshot(self, player_id: str) -> dict:
        """Full state view for one participant (no hidden ballots)."""
        game = self.game
        state: dict = {
            "started": game.started,
            "over": game.over,
            "board": dict(game.scoreboard),
            "used_letters": list(game.used_letters),
            "outcome": game.outcome.to_dict() if game.outcome else None,
            "round": None,
        }
        round_state = game.current_round
        if round_state is None and game.rounds:
            last = game.rounds[-1]
            state["last_scored_round"] = {
                "round": last.round_number,
                "events": [e.to_dict() for e in last.score_events],
            }
        if round_state is not None:
            view = {
                "round": round_state.round_number,
                "letter": round_state.letter,
                "phase": round_state.phase.value,
                "deadline": round_state.deadline_ms,
                "submitted": sorted(round_state.submitted),
                "contested": [ref.to_dict() for ref in round_state.contested_queue],
                "position": round_state.cursor + 1,
                "transcript": [a.to_dict() for a in round_state.transcript],
            }
            if round_state.phase is Phase.SUBMISSION:
                own = round_state.submissions.get(player_id, {})
                view["entries"] = [own[c].to_dict(round_state.round_number) for c in sorted(own)]
            else:
                view["entries"] = self._entries_payload(round_state)
                current = round_state.current_ref()
                if current is not None:
                    view["current_ref"] = current.to_dict()
                    view["challengers"] = list(round_state.challengers.get(current, []))
            state["round"] = view
        return state
