"""Rules engine for the participation game.

A Categories-style word game: each round a letter is drawn, players write one
word per category starting with that letter, challenged words are debated and
settled by majority vote, and approved words score 2 points (unique) or
1 point (duplicated). Play ends at a victory threshold, a wall-clock budget,
a round cap, or when the alphabet runs out.

This module is the complete, deterministic state machine for one game. It
performs no I/O and never reads the wall clock: every operation that depends
on time takes an explicit ``now_ms`` timestamp (integer milliseconds), and
randomness flows through an explicit 64-bit generator state threaded on
:class:`GameState`. Two games fed the same ordered inputs and seed evolve
identically.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence

DEFAULT_CATEGORIES: tuple[str, ...] = (
    "foods",
    "places",
    "first names",
    "films",
    "fowl",
    "colors",
    "animals",
    "occupations",
    "sports",
    "plants",
    "cities",
    "things",
)

# Parlour custom: skip the hard letters.
DEFAULT_ALPHABET: tuple[str, ...] = tuple(
    c for c in "ABCDEFGHIJKLMNOPQRSTUVWXYZ" if c not in ("Q", "X", "Z")
)

MAX_ARGUMENT_LENGTH = 2000

_MASK64 = (1 << 64) - 1


class GameError(Exception):
    """Base for all rule violations; ``code`` is the stable protocol tag."""

    code = "GameError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class ConfigError(GameError):
    code = "ConfigError"


class NotEnoughPlayers(GameError):
    code = "NotEnoughPlayers"


class NoArtificialParticipant(GameError):
    code = "NoArtificialParticipant"


class AlphabetExhausted(GameError):
    code = "AlphabetExhausted"


class WrongPhase(GameError):
    code = "WrongPhase"


class DeadlinePassed(GameError):
    code = "DeadlinePassed"


class UnknownCategory(GameError):
    code = "UnknownCategory"


class UnknownPlayer(GameError):
    code = "UnknownPlayer"


class UnknownVoter(GameError):
    code = "UnknownVoter"


class UnknownWord(GameError):
    code = "UnknownWord"


class SelfChallenge(GameError):
    code = "SelfChallenge"


class WrongWord(GameError):
    code = "WrongWord"


class EmptyArgument(GameError):
    code = "EmptyArgument"


class TooLong(GameError):
    code = "TooLong"


class NonTerminalEntry(GameError):
    code = "NonTerminalEntry"


class GameFull(GameError):
    code = "GameFull"


class NameTaken(GameError):
    code = "NameTaken"


class GameOver(GameError):
    code = "GameOver"


class Phase(str, Enum):
    SUBMISSION = "SUBMISSION"
    REVEAL = "REVEAL"
    DEBATE = "DEBATE"
    VOTING = "VOTING"
    SCORED = "SCORED"


class WordStatus(str, Enum):
    PENDING = "PENDING"
    AUTO_REJECTED = "AUTO_REJECTED"
    UNCONTESTED_APPROVED = "UNCONTESTED_APPROVED"
    CONTESTED = "CONTESTED"
    APPROVED = "APPROVED"
    REJECTED = "REJECTED"


APPROVED_STATUSES = frozenset({WordStatus.UNCONTESTED_APPROVED, WordStatus.APPROVED})
TERMINAL_STATUSES = frozenset(
    {
        WordStatus.AUTO_REJECTED,
        WordStatus.UNCONTESTED_APPROVED,
        WordStatus.APPROVED,
        WordStatus.REJECTED,
    }
)


class Kind(str, Enum):
    HUMAN = "HUMAN"
    ARTIFICIAL = "ARTIFICIAL"


class Ballot(str, Enum):
    APPROVE = "APPROVE"
    REJECT = "REJECT"


def rng_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 generator: returns (value, new_state).

    A tiny explicit-state generator keeps GameState a plain serializable
    value; the state is the full 64-bit seed lineage.
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def derive_seed(seed: int, index: int) -> int:
    """Stable per-slot seed derivation (seed and index both folded in)."""
    value, _ = rng_next((seed + index) & _MASK64)
    return value


@dataclass
class GameConfig:
    """All tunable rule parameters for one game."""

    categories: tuple[str, ...] = DEFAULT_CATEGORIES
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET
    submission_seconds: int = 180
    debate_seconds: int = 120
    vote_seconds: int = 30
    victory_points: int = 21
    max_rounds: int = 26
    max_game_seconds: int = 1800
    min_players: int = 4
    max_players: int = 6
    rng_seed: int = 0

    def __post_init__(self) -> None:
        self.categories = tuple(self.categories)
        self.alphabet = tuple(dict.fromkeys(str(a).upper() for a in self.alphabet))

    def validate(self) -> None:
        if len(self.categories) < 1:
            raise ConfigError("at least one category is required")
        if not self.alphabet:
            raise ConfigError("alphabet must be nonempty")
        if any(len(a) != 1 for a in self.alphabet):
            raise ConfigError("alphabet letters must be single characters")
        for name in ("submission_seconds", "debate_seconds", "vote_seconds"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.victory_points <= 0:
            raise ConfigError("victory_points must be positive")
        if self.max_rounds <= 0:
            raise ConfigError("max_rounds must be positive")
        if self.max_game_seconds <= 0:
            raise ConfigError("max_game_seconds must be positive")
        if self.min_players > self.max_players:
            raise ConfigError("min_players must not exceed max_players")
        if self.min_players < 1:
            raise ConfigError("min_players must be at least 1")
        if not 0 <= self.rng_seed <= _MASK64:
            raise ConfigError("rng_seed must fit in 64 bits")
        # Letters are drawn without replacement, so the alphabet bounds the
        # number of playable rounds; a larger max_rounds is simply never
        # reached (the game ends on alphabet exhaustion first).

    def to_dict(self) -> dict:
        return {
            "categories": list(self.categories),
            "alphabet": list(self.alphabet),
            "submission_seconds": self.submission_seconds,
            "debate_seconds": self.debate_seconds,
            "vote_seconds": self.vote_seconds,
            "victory_points": self.victory_points,
            "max_rounds": self.max_rounds,
            "max_game_seconds": self.max_game_seconds,
            "min_players": self.min_players,
            "max_players": self.max_players,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GameConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        config = cls(**known)
        config.validate()
        return config


@dataclass
class Participant:
    """A registered player. ``kind`` is declared at join and never changes."""

    id: str
    display_name: str
    kind: Kind
    connected: bool = True

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.display_name,
            "kind": self.kind.value,
            "connected": self.connected,
        }


@dataclass(frozen=True)
class WordRef:
    """Identifies one submitted word: (round, author, category)."""

    round: int
    author: str
    category: int

    def to_dict(self) -> dict:
        return {"round": self.round, "author_id": self.author, "category_index": self.category}

    @classmethod
    def from_dict(cls, data: Mapping) -> "WordRef":
        return cls(
            round=int(data["round"]),
            author=str(data["author_id"]),
            category=int(data["category_index"]),
        )


@dataclass
class WordEntry:
    author: str
    category_index: int
    raw: str
    normalized: str
    status: WordStatus = WordStatus.PENDING

    def to_dict(self, round_number: int) -> dict:
        return {
            "ref": WordRef(round_number, self.author, self.category_index).to_dict(),
            "raw": self.raw,
            "normalized": self.normalized,
            "status": self.status.value,
        }


@dataclass
class Argument:
    author: str
    ref: WordRef
    text: str
    seq: int

    def to_dict(self) -> dict:
        return {"author_id": self.author, "ref": self.ref.to_dict(), "text": self.text, "seq": self.seq}


@dataclass(frozen=True)
class ScoreEvent:
    player: str
    round_number: int
    category_index: int
    points: int

    def to_dict(self) -> dict:
        return {
            "player_id": self.player,
            "round": self.round_number,
            "category_index": self.category_index,
            "points": self.points,
        }


@dataclass
class TallyResult:
    ref: WordRef
    approve: int
    reject: int
    status: WordStatus


@dataclass
class GameOutcome:
    """Terminal ranking. Ties at the top share the victory."""

    ranking: list[dict]
    winners: list[str]

    def to_dict(self) -> dict:
        return {"ranking": self.ranking, "winners": self.winners}


@dataclass
class RoundState:
    """One round: letter, phase, submissions, contests, debate, ballots."""

    round_number: int
    letter: str
    players: tuple[str, ...]
    category_count: int
    phase: Phase = Phase.SUBMISSION
    deadline_ms: int = 0
    submissions: dict[str, dict[int, WordEntry]] = field(default_factory=dict)
    submitted: set[str] = field(default_factory=set)
    contested_queue: list[WordRef] = field(default_factory=list)
    challengers: dict[WordRef, list[str]] = field(default_factory=dict)
    cursor: int = 0
    transcript: list[Argument] = field(default_factory=list)
    ballots: dict[WordRef, dict[str, Ballot]] = field(default_factory=dict)
    score_events: list[ScoreEvent] = field(default_factory=list)

    def entry(self, ref: WordRef) -> Optional[WordEntry]:
        if ref.round != self.round_number:
            return None
        return self.submissions.get(ref.author, {}).get(ref.category)

    def entries(self) -> Iterator[WordEntry]:
        for slots in self.submissions.values():
            yield from slots.values()

    def current_ref(self) -> Optional[WordRef]:
        if self.cursor < len(self.contested_queue):
            return self.contested_queue[self.cursor]
        return None


def normalize_word(raw: str) -> str:
    """Canonical form: case-folded, trimmed, inner whitespace collapsed.

    Total and idempotent; equality disputes beyond this belong in the vote.
    """
    return " ".join(raw.casefold().split())


def starts_with_letter(normalized: str, letter: str) -> bool:
    """True iff the first character of ``normalized`` case-folds to ``letter``."""
    if not normalized:
        return False
    return normalized[0].casefold() == letter.casefold()


def draw_letter(
    rng_state: int, used_letters: Iterable[str], alphabet: Sequence[str]
) -> tuple[str, int]:
    """Draw an unused letter; raises AlphabetExhausted when none remain."""
    used = set(used_letters)
    remaining = [a for a in alphabet if a not in used]
    if not remaining:
        raise AlphabetExhausted("no letters remain in the alphabet")
    value, new_state = rng_next(rng_state)
    return remaining[value % len(remaining)], new_state


def tally_votes(ballots: Mapping[str, Ballot]) -> WordStatus:
    """Majority over cast ballots; ties and empty ballots reject.

    Abstentions never appear here (an abstaining voter casts nothing), so
    the count is strictly over cast ballots.
    """
    approve = sum(1 for b in ballots.values() if b is Ballot.APPROVE)
    reject = len(ballots) - approve
    return WordStatus.APPROVED if approve > reject else WordStatus.REJECTED


def score_round(round_state: RoundState) -> list[ScoreEvent]:
    """Apply the 2/1/0 rule to a finished round.

    Emits exactly one event per (player, category) slot, blanks included.
    A duplicate means another *approved* entry in the same category has the
    same normalized form; rejected twins do not demote an approved word.
    """
    for entry in round_state.entries():
        if entry.status not in TERMINAL_STATUSES:
            raise NonTerminalEntry(
                f"entry by {entry.author} in category {entry.category_index} is {entry.status.value}"
            )
    approved_counts: dict[int, Counter] = {}
    for entry in round_state.entries():
        if entry.status in APPROVED_STATUSES:
            counter = approved_counts.setdefault(entry.category_index, Counter())
            counter[entry.normalized] += 1
    events: list[ScoreEvent] = []
    for player in round_state.players:
        slots = round_state.submissions.get(player, {})
        for category in range(round_state.category_count):
            entry = slots.get(category)
            if entry is None or entry.status not in APPROVED_STATUSES:
                points = 0
            elif approved_counts[category][entry.normalized] > 1:
                points = 1
            else:
                points = 2
            events.append(ScoreEvent(player, round_state.round_number, category, points))
    return events


def evaluate_termination(
    scoreboard: Mapping[str, int],
    participants: Mapping[str, Participant],
    elapsed_seconds: float,
    rounds_played: int,
    letters_remaining: int,
    config: GameConfig,
) -> Optional[GameOutcome]:
    """GAME_OVER when a score reaches the threshold, the clock or round cap
    is hit, or no letters remain; otherwise None (continue)."""
    over = (
        any(score >= config.victory_points for score in scoreboard.values())
        or elapsed_seconds >= config.max_game_seconds
        or rounds_played >= config.max_rounds
        or letters_remaining == 0
    )
    if not over:
        return None
    ranking = sorted(
        (
            {"player_id": pid, "name": participants[pid].display_name, "score": score}
            for pid, score in scoreboard.items()
        ),
        key=lambda row: (-row["score"], row["name"]),
    )
    top = ranking[0]["score"] if ranking else 0
    winners = [row["player_id"] for row in ranking if row["score"] == top]
    return GameOutcome(ranking=ranking, winners=winners)


class Game:
    """State machine of one game, from lobby to final ranking.

    Methods mutate this instance in place and raise :class:`GameError`
    subclasses *before* any mutation, so a rejected input leaves the state
    untouched. Ordering of inputs is entirely the caller's responsibility.
    """

    def __init__(self, config: GameConfig):
        config.validate()
        self.config = config
        self.participants: dict[str, Participant] = {}
        self.rounds: list[RoundState] = []
        self.scoreboard: dict[str, int] = {}
        self.score_log: list[ScoreEvent] = []
        self.used_letters: list[str] = []
        self.rng_state: int = config.rng_seed
        self.started_at_ms: Optional[int] = None
        self.outcome: Optional[GameOutcome] = None

    # -- roster -------------------------------------------------------

    @property
    def current_round(self) -> Optional[RoundState]:
        if self.rounds and self.rounds[-1].phase is not Phase.SCORED:
            return self.rounds[-1]
        return None

    @property
    def started(self) -> bool:
        return bool(self.rounds)

    @property
    def over(self) -> bool:
        return self.outcome is not None

    def add_participant(self, participant: Participant) -> None:
        self._require_active()
        if self.started:
            raise WrongPhase("cannot join after the game has started")
        if participant.id in self.participants:
            raise GameError(f"duplicate participant id {participant.id!r}")
        if any(
            p.display_name == participant.display_name for p in self.participants.values()
        ):
            raise NameTaken(f"display name {participant.display_name!r} already taken")
        if len(self.participants) >= self.config.max_players:
            raise GameFull("game is full")
        self.participants[participant.id] = participant
        self.scoreboard[participant.id] = 0

    def set_connected(self, player_id: str, connected: bool) -> None:
        participant = self.participants.get(player_id)
        if participant is None:
            raise UnknownPlayer(player_id)
        participant.connected = connected

    # -- round lifecycle ----------------------------------------------

    def open_round(self, now_ms: int) -> RoundState:
        """Draw a fresh letter and open submissions."""
        self._require_active()
        if self.current_round is not None:
            raise WrongPhase("previous round is still in progress")
        n = len(self.participants)
        if n < self.config.min_players or n > self.config.max_players:
            raise NotEnoughPlayers(
                f"{n} players; need {self.config.min_players}-{self.config.max_players}"
            )
        if not any(p.kind is Kind.ARTIFICIAL for p in self.participants.values()):
            raise NoArtificialParticipant(
                "a participation game requires at least one artificial participant"
            )
        letter, self.rng_state = draw_letter(
            self.rng_state, self.used_letters, self.config.alphabet
        )
        self.used_letters.append(letter)
        if self.started_at_ms is None:
            self.started_at_ms = now_ms
        round_state = RoundState(
            round_number=len(self.rounds) + 1,
            letter=letter,
            players=tuple(self.participants),
            category_count=len(self.config.categories),
            deadline_ms=now_ms + self.config.submission_seconds * 1000,
        )
        self.rounds.append(round_state)
        return round_state

    def accept_submission(
        self, player_id: str, entries: Sequence[tuple[int, str]], now_ms: int
    ) -> RoundState:
        """Store (category, word) pairs; resubmission is last-write-wins."""
        round_state = self._round_in(Phase.SUBMISSION)
        if player_id not in self.participants:
            raise UnknownPlayer(player_id)
        if now_ms > round_state.deadline_ms:
            raise DeadlinePassed("submission window is closed")
        for category, _ in entries:
            if not 0 <= category < len(self.config.categories):
                raise UnknownCategory(f"category index {category} out of range")
        slots = round_state.submissions.setdefault(player_id, {})
        for category, raw in entries:
            slots[category] = WordEntry(
                author=player_id,
                category_index=category,
                raw=raw,
                normalized=normalize_word(raw),
            )
        round_state.submitted.add(player_id)
        return round_state

    def close_submissions(self, now_ms: int) -> list[WordRef]:
        """Reveal: blanks and letter misses are auto-rejected, rest stay pending.

        Missing slots are materialized as blank entries so every (player,
        category) pair scores. Returns the auto-rejected refs.
        """
        round_state = self._round_in(Phase.SUBMISSION)
        auto_rejected: list[WordRef] = []
        for player in round_state.players:
            slots = round_state.submissions.setdefault(player, {})
            for category in range(round_state.category_count):
                entry = slots.get(category)
                if entry is None:
                    entry = WordEntry(player, category, raw="", normalized="")
                    slots[category] = entry
                if not entry.raw or not starts_with_letter(
                    entry.normalized, round_state.letter
                ):
                    entry.status = WordStatus.AUTO_REJECTED
                    auto_rejected.append(WordRef(round_state.round_number, player, category))
        round_state.phase = Phase.REVEAL
        round_state.deadline_ms = now_ms + self.config.debate_seconds * 1000
        return auto_rejected

    def raise_challenge(self, challenger: str, ref: WordRef) -> WordEntry:
        """Contest a word; duplicate challenges are idempotent."""
        round_state = self._round_in(Phase.REVEAL, Phase.DEBATE)
        if challenger not in self.participants:
            raise UnknownPlayer(challenger)
        entry = round_state.entry(ref)
        if entry is None or entry.status not in (WordStatus.PENDING, WordStatus.CONTESTED):
            raise UnknownWord(f"no challengeable word at {ref}")
        if challenger == ref.author:
            raise SelfChallenge("authors cannot contest their own words")
        if entry.status is WordStatus.PENDING:
            entry.status = WordStatus.CONTESTED
            round_state.contested_queue.append(ref)
        names = round_state.challengers.setdefault(ref, [])
        if challenger not in names:
            names.append(challenger)
        return entry

    def close_reveal(self, now_ms: int) -> Optional[list[ScoreEvent]]:
        """Approve unchallenged words; open debate or, with no contests, score."""
        round_state = self._round_in(Phase.REVEAL)
        for entry in round_state.entries():
            if entry.status is WordStatus.PENDING:
                entry.status = WordStatus.UNCONTESTED_APPROVED
        if not round_state.contested_queue:
            return self.score_current_round()
        round_state.phase = Phase.DEBATE
        round_state.cursor = 0
        round_state.deadline_ms = now_ms + self.config.debate_seconds * 1000
        return None

    def record_argument(self, author: str, ref: WordRef, text: str) -> Argument:
        round_state = self._round_in(Phase.DEBATE)
        if author not in self.participants:
            raise UnknownPlayer(author)
        if ref != round_state.current_ref():
            raise WrongWord(f"{ref} is not under debate")
        if not text.strip():
            raise EmptyArgument("argument text is empty")
        if len(text) > MAX_ARGUMENT_LENGTH:
            raise TooLong(f"argument exceeds {MAX_ARGUMENT_LENGTH} characters")
        argument = Argument(author, ref, text, seq=len(round_state.transcript) + 1)
        round_state.transcript.append(argument)
        return argument

    def close_debate(self, now_ms: int) -> WordRef:
        """Move the word under debate to its vote."""
        round_state = self._round_in(Phase.DEBATE)
        ref = round_state.current_ref()
        assert ref is not None
        round_state.phase = Phase.VOTING
        round_state.deadline_ms = now_ms + self.config.vote_seconds * 1000
        return ref

    def cast_vote(self, voter: str, ref: WordRef, ballot: Ballot) -> None:
        """Record a ballot; re-voting before the tally overwrites."""
        round_state = self._round_in(Phase.VOTING)
        if voter not in self.participants:
            raise UnknownVoter(voter)
        if ref != round_state.current_ref():
            raise WrongPhase(f"voting is not open for {ref}")
        round_state.ballots.setdefault(ref, {})[voter] = ballot

    def close_voting(self, now_ms: int) -> TallyResult:
        """Tally the current word, then continue to the next contest or score."""
        round_state = self._round_in(Phase.VOTING)
        ref = round_state.current_ref()
        assert ref is not None
        entry = round_state.entry(ref)
        assert entry is not None
        ballots = round_state.ballots.get(ref, {})
        status = tally_votes(ballots)
        entry.status = status
        approve = sum(1 for b in ballots.values() if b is Ballot.APPROVE)
        result = TallyResult(ref, approve, len(ballots) - approve, status)
        round_state.cursor += 1
        if round_state.current_ref() is None:
            self.score_current_round()
        else:
            round_state.phase = Phase.DEBATE
            round_state.deadline_ms = now_ms + self.config.debate_seconds * 1000
        return result

    def score_current_round(self) -> list[ScoreEvent]:
        round_state = self.rounds[-1] if self.rounds else None
        if round_state is None or round_state.phase is Phase.SCORED:
            raise WrongPhase("no round awaiting scoring")
        events = score_round(round_state)
        round_state.score_events = events
        round_state.phase = Phase.SCORED
        for event in events:
            self.scoreboard[event.player] += event.points
        self.score_log.extend(events)
        return events

    # -- termination ----------------------------------------------------

    def elapsed_seconds(self, now_ms: int) -> float:
        if self.started_at_ms is None:
            return 0.0
        return (now_ms - self.started_at_ms) / 1000.0

    def check_termination(self, now_ms: int) -> Optional[GameOutcome]:
        """Evaluate after each scored round (and between rounds)."""
        if self.outcome is not None:
            return self.outcome
        return evaluate_termination(
            self.scoreboard,
            self.participants,
            self.elapsed_seconds(now_ms),
            rounds_played=len(self.rounds),
            letters_remaining=len(self.config.alphabet) - len(self.used_letters),
            config=self.config,
        )

    def finish(self, outcome: GameOutcome) -> None:
        self._require_active()
        self.outcome = outcome

    # -- internals ------------------------------------------------------

    def _require_active(self) -> None:
        if self.outcome is not None:
            raise GameOver("the game has ended")

    def _round_in(self, *phases: Phase) -> RoundState:
        self._require_active()
        round_state = self.current_round
        if round_state is None:
            raise WrongPhase("no round in progress")
        if round_state.phase not in phases:
            raise WrongPhase(
                f"operation requires {'/'.join(p.value for p in phases)}, "
                f"round is in {round_state.phase.value}"
            )
        return round_state
