"""Artificial-participant SDK.

A :class:`BotPolicy` makes four decisions: which words to propose, which
revealed words to challenge, what to say in a debate, and how to vote. The
:class:`BotAdapter` wraps a policy as a table participant: it watches the
broadcast frame stream, builds a :class:`BotContext` containing only what a
player at the table could see, and sanitizes the policy's output so that a
misbehaving policy degrades to silence instead of protocol errors.

Every policy is artificial by construction; there is no way to build one
that identifies as human.
"""

from __future__ import annotations

import logging
import random
import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

from participation_game import session as proto
from participation_game.core import (
    GameConfig,
    Kind,
    MAX_ARGUMENT_LENGTH,
    WordRef,
    WordStatus,
    normalize_word,
    starts_with_letter,
)
from participation_game.lexicon import Lexicon

logger = logging.getLogger(__name__)

ABSTAIN = "ABSTAIN"
APPROVE = "APPROVE"
REJECT = "REJECT"

# Debate floor: authors and challengers get three turns per contested word,
# everyone else one, so timed debate phases stay bounded.
PARTY_ARGUMENT_BUDGET = 3
BYSTANDER_ARGUMENT_BUDGET = 1

DEFAULT_REASON = "it fits the category as commonly understood"


@dataclass
class BotContext:
    """Everything a policy may look at: the table view, nothing hidden."""

    self_id: str
    display_name: str
    config: GameConfig
    roster: list[dict] = field(default_factory=list)
    phase: Optional[str] = None
    round_number: int = 0
    letter: str = ""
    deadline_ms: int = 0
    entries: list[dict] = field(default_factory=list)
    contested: Optional[dict] = None  # word_ref dict of the word on the floor
    contested_word: str = ""
    contested_category: int = -1
    author_id: str = ""
    challengers: list[str] = field(default_factory=list)
    transcript: list[dict] = field(default_factory=list)
    board: dict = field(default_factory=dict)

    def category_label(self, index: int) -> str:
        if 0 <= index < len(self.config.categories):
            return self.config.categories[index]
        return f"category {index}"

    @property
    def is_author(self) -> bool:
        return self.author_id == self.self_id

    @property
    def is_challenger(self) -> bool:
        return self.self_id in self.challengers


class BotPolicy:
    """Base policy: sits out everything. Subclasses override the four calls."""

    def __init__(self, display_name: str):
        self.display_name = display_name

    @property
    def kind(self) -> Kind:
        # Truthful identification: artificial, always.
        return Kind.ARTIFICIAL

    def propose_words(self, ctx: BotContext) -> list[tuple[int, str]]:
        return []

    def decide_challenges(self, ctx: BotContext) -> list[WordRef]:
        return []

    def compose_argument(self, ctx: BotContext) -> str:
        return ""

    def decide_vote(self, ctx: BotContext) -> str:
        return ABSTAIN


class PassiveBot(BotPolicy):
    """Submits nothing, challenges nothing, abstains from every vote."""


class LexiconBot(BotPolicy):
    """Plays from a word list: proposes the first match per category,
    approves exactly the words its lexicon knows, defends its own words."""

    def __init__(self, display_name: str, lexicon: Lexicon):
        super().__init__(display_name)
        self.lexicon = lexicon

    def propose_words(self, ctx: BotContext) -> list[tuple[int, str]]:
        proposals = []
        for index, label in enumerate(ctx.config.categories):
            matches = self.lexicon.words_for(label, ctx.letter)
            if matches:
                proposals.append((index, matches[0]))
        return proposals

    def compose_argument(self, ctx: BotContext) -> str:
        label = ctx.category_label(ctx.contested_category)
        if ctx.is_author:
            reason = self.lexicon.note_for(ctx.contested_word, label) or DEFAULT_REASON
            return f"{normalize_word(ctx.contested_word)} is a valid {label} entry because {reason}."
        if ctx.is_challenger:
            return (
                f"I do not recognize {normalize_word(ctx.contested_word)} as {label}; "
                f"none of my references list it."
            )
        return ""

    def decide_vote(self, ctx: BotContext) -> str:
        label = ctx.category_label(ctx.contested_category)
        if ctx.is_author:
            return APPROVE
        return APPROVE if self.lexicon.contains(ctx.contested_word, label) else REJECT


class ContrarianBot(LexiconBot):
    """A lexicon player that also contests every word it cannot verify."""

    def decide_challenges(self, ctx: BotContext) -> list[WordRef]:
        refs = []
        for entry in ctx.entries:
            ref = entry["ref"]
            if ref["author_id"] == ctx.self_id:
                continue
            if entry["status"] != WordStatus.PENDING.value:
                continue
            label = ctx.category_label(ref["category_index"])
            if not self.lexicon.contains(entry["raw"], label):
                refs.append(WordRef.from_dict(ref))
        # Hash order spreads challenges across authors instead of burning
        # through the first player's list; still fully deterministic.
        refs.sort(key=lambda r: zlib.crc32(f"{r.round}|{r.author}|{r.category}".encode()))
        return refs


_SYLLABLES = ("ar", "en", "il", "or", "ut", "an", "es", "ol", "ir", "um")


class RandomBot(BotPolicy):
    """Invents pseudo-words and votes by coin flip; deterministic per seed.

    One proposal in eight starts with the wrong letter, so games routinely
    exercise the mechanical letter rejection.
    """

    def __init__(self, display_name: str, seed: int):
        super().__init__(display_name)
        self._rng = random.Random(seed)

    def propose_words(self, ctx: BotContext) -> list[tuple[int, str]]:
        proposals = []
        alphabet = ctx.config.alphabet
        for index in range(len(ctx.config.categories)):
            first = ctx.letter
            if self._rng.random() < 0.125:
                first = alphabet[self._rng.randrange(len(alphabet))]
            suffix = "".join(self._rng.choice(_SYLLABLES) for _ in range(2))
            proposals.append((index, first.lower() + suffix))
        return proposals

    def compose_argument(self, ctx: BotContext) -> str:
        if ctx.is_author:
            label = ctx.category_label(ctx.contested_category)
            return f"Where I come from, {normalize_word(ctx.contested_word)} is a well known {label}."
        return ""

    def decide_vote(self, ctx: BotContext) -> str:
        return APPROVE if self._rng.random() < 0.5 else REJECT


class BotAdapter:
    """Runs one policy against the broadcast frame stream of one game.

    ``on_frame`` consumes a single outbound frame and returns the inbound
    frames the bot wants to send, already sanitized: malformed proposals are
    dropped, self-challenges filtered, arguments clipped to the length cap,
    debate-floor budgets enforced, and abstentions send nothing.
    """

    def __init__(self, policy: BotPolicy):
        self.policy = policy
        self.player_id: Optional[str] = None
        self.config: Optional[GameConfig] = None
        self.roster: list[dict] = []
        self.board: dict = {}
        self.done = False
        self._round_number = 0
        self._letter = ""
        self._deadline_ms = 0
        self._entries: list[dict] = []
        self._challenged_round = 0
        self._debate: Optional[dict] = None
        self._transcript: list[dict] = []
        self._args_sent: dict[tuple, int] = {}

    @property
    def display_name(self) -> str:
        return self.policy.display_name

    def _ctx(self, phase: Optional[str]) -> BotContext:
        debate = self._debate or {}
        return BotContext(
            self_id=self.player_id,
            display_name=self.policy.display_name,
            config=self.config,
            roster=self.roster,
            phase=phase,
            round_number=self._round_number,
            letter=self._letter,
            deadline_ms=self._deadline_ms,
            entries=list(self._entries),
            contested=debate.get("word_ref"),
            contested_word=debate.get("word", ""),
            contested_category=debate.get("category_index", -1),
            author_id=debate.get("author_id", ""),
            challengers=list(debate.get("challengers", [])),
            transcript=list(self._transcript),
            board=dict(self.board),
        )

    def on_frame(self, frame: dict) -> list[tuple[str, dict]]:
        ftype = frame["type"]
        payload = frame["payload"]
        if ftype == proto.WELCOME:
            self.player_id = payload["player_id"]
            self.config = GameConfig.from_dict(payload["config"])
            self.roster = payload["roster"]
            return []
        if self.player_id is None or self.config is None:
            return []
        if ftype == proto.ROSTER:
            self.roster = payload["players"]
            return []
        if ftype == proto.ROUND_START:
            return self._on_round_start(payload)
        if ftype == proto.REVEAL:
            return self._on_reveal(payload)
        if ftype == proto.DEBATE_OPEN:
            return self._on_debate_open(payload)
        if ftype == proto.ARGUMENT_ECHO:
            self._transcript.append(payload)
            return []
        if ftype == proto.VOTE_OPEN:
            return self._on_vote_open(payload)
        if ftype == proto.SCORES:
            self.board = payload["board"]
            return []
        if ftype == proto.GAME_OVER:
            self.done = True
            return []
        return []

    def _on_round_start(self, payload: dict) -> list[tuple[str, dict]]:
        self._round_number = payload["round"]
        self._letter = payload["letter"]
        self._deadline_ms = payload["deadline"]
        self._entries = []
        self._transcript = []
        self._debate = None
        proposals = self._safe(self.policy.propose_words, self._ctx("SUBMISSION")) or []
        entries = self._sanitize_proposals(proposals)
        return [
            (proto.SUBMIT_WORDS, {"round": self._round_number, "entries": entries})
        ]

    def _sanitize_proposals(self, proposals) -> list[dict]:
        entries: list[dict] = []
        seen: set[int] = set()
        if not isinstance(proposals, Sequence):
            logger.warning("%s: propose_words returned %r, ignored", self.display_name, proposals)
            return entries
        for item in proposals:
            try:
                category, word = item
                category = int(category)
                word = str(word)
            except (TypeError, ValueError):
                logger.warning("%s: dropped malformed proposal %r", self.display_name, item)
                continue
            if category in seen or not 0 <= category < len(self.config.categories):
                logger.warning("%s: dropped proposal for category %r", self.display_name, category)
                continue
            if not word.strip():
                continue
            seen.add(category)
            entries.append({"category": category, "word": word})
        return entries

    def _on_reveal(self, payload: dict) -> list[tuple[str, dict]]:
        self._entries = payload["entries"]
        self._deadline_ms = payload["deadline"]
        if self._challenged_round == self._round_number:
            return []  # re-broadcast after someone's challenge; already decided
        self._challenged_round = self._round_number
        refs = self._safe(self.policy.decide_challenges, self._ctx("REVEAL")) or []
        frames = []
        seen: set[WordRef] = set()
        known = {
            (e["ref"]["round"], e["ref"]["author_id"], e["ref"]["category_index"]): e
            for e in self._entries
        }
        for ref in refs:
            if not isinstance(ref, WordRef):
                logger.warning("%s: dropped non-ref challenge %r", self.display_name, ref)
                continue
            entry = known.get((ref.round, ref.author, ref.category))
            if entry is None or ref in seen:
                continue
            if ref.author == self.player_id:
                logger.warning("%s: filtered self-challenge on %s", self.display_name, ref)
                continue
            if entry["status"] not in (WordStatus.PENDING.value, WordStatus.CONTESTED.value):
                continue
            seen.add(ref)
            frames.append(
                (
                    proto.CHALLENGE,
                    {"round": ref.round, "author": ref.author, "category": ref.category},
                )
            )
        return frames

    def _on_debate_open(self, payload: dict) -> list[tuple[str, dict]]:
        self._debate = payload
        self._deadline_ms = payload["deadline"]
        ctx = self._ctx("DEBATE")
        key = (payload["word_ref"]["round"], payload["word_ref"]["author_id"], payload["word_ref"]["category_index"])
        budget = PARTY_ARGUMENT_BUDGET if (ctx.is_author or ctx.is_challenger) else BYSTANDER_ARGUMENT_BUDGET
        if self._args_sent.get(key, 0) >= budget:
            return []
        text = self._safe(self.policy.compose_argument, ctx)
        if not isinstance(text, str) or not text.strip():
            return []
        if len(text) > MAX_ARGUMENT_LENGTH:
            logger.warning("%s: argument clipped to %d chars", self.display_name, MAX_ARGUMENT_LENGTH)
            text = text[:MAX_ARGUMENT_LENGTH]
        self._args_sent[key] = self._args_sent.get(key, 0) + 1
        return [(proto.ARGUMENT, {"word_ref": payload["word_ref"], "text": text})]

    def _on_vote_open(self, payload: dict) -> list[tuple[str, dict]]:
        self._deadline_ms = payload["deadline"]
        ctx = self._ctx("VOTING")
        choice = self._safe(self.policy.decide_vote, ctx)
        if choice not in (APPROVE, REJECT):
            if choice not in (ABSTAIN, None):
                logger.warning("%s: dropped vote %r", self.display_name, choice)
            return []
        return [(proto.VOTE, {"word_ref": payload["word_ref"], "choice": choice})]

    def _safe(self, call, ctx: BotContext):
        try:
            return call(ctx)
        except Exception:
            logger.exception("%s: policy call %s failed; treating as no-op", self.display_name, call.__name__)
            return None
