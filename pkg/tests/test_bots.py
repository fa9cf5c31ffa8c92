"""Bot SDK: policy behaviors, adapter sanitization, debate-floor budgets,
and determinism of scripted bots under a fixed seed."""

import pytest

from participation_game import session as proto
from participation_game.bots import (
    ABSTAIN,
    APPROVE,
    BotAdapter,
    BotContext,
    BotPolicy,
    ContrarianBot,
    LexiconBot,
    PassiveBot,
    REJECT,
    RandomBot,
)
from participation_game.core import GameConfig, Kind, WordRef
from participation_game.lexicon import fixture_lexicon, parse_lexicon

SIX = ("foods", "places", "first names", "films", "fowl", "colors")


def make_ctx(**overrides) -> BotContext:
    defaults = dict(
        self_id="p1",
        display_name="bot",
        config=GameConfig(categories=SIX),
        letter="F",
        round_number=1,
        phase="SUBMISSION",
    )
    defaults.update(overrides)
    return BotContext(**defaults)


def frame(ftype, payload):
    return {"type": ftype, "game": "g1", "seq": 1, "payload": payload}


def attach(adapter, player_id="p1", categories=SIX):
    adapter.on_frame(
        frame(
            proto.WELCOME,
            {
                "player_id": player_id,
                "token": "t",
                "config": GameConfig(categories=categories).to_dict(),
                "roster": [],
                "now_ms": 0,
                "last_seq": 0,
                "state": {},
            },
        )
    )


# -- policies -------------------------------------------------------------------


def test_policy_kind_is_always_artificial():
    for policy in (BotPolicy("x"), PassiveBot("y"), LexiconBot("z", fixture_lexicon())):
        assert policy.kind is Kind.ARTIFICIAL
    with pytest.raises(AttributeError):
        BotPolicy("x").kind = Kind.HUMAN


def test_lexicon_bot_proposes_known_words():
    bot = LexiconBot("lex", fixture_lexicon())
    proposals = dict(bot.propose_words(make_ctx()))
    assert proposals[1] == "France"
    assert proposals[5] == "fuchsia"


def test_lexicon_bot_blank_when_no_match():
    lex = parse_lexicon("France\tplaces\n")
    bot = LexiconBot("lex", lex)
    ctx = make_ctx(letter="G")
    assert bot.propose_words(ctx) == []


def test_lexicon_bot_votes_by_lexicon():
    bot = LexiconBot("lex", fixture_lexicon())
    approve_ctx = make_ctx(
        phase="VOTING", contested_word="France", contested_category=1, author_id="p9"
    )
    assert bot.decide_vote(approve_ctx) == APPROVE
    reject_ctx = make_ctx(
        phase="VOTING", contested_word="grape", contested_category=5, author_id="p9"
    )
    assert bot.decide_vote(reject_ctx) == REJECT


def test_author_argument_uses_lexicon_note():
    bot = LexiconBot("lex", fixture_lexicon())
    ctx = make_ctx(
        phase="DEBATE",
        contested_word="fuchsia",
        contested_category=5,
        author_id="p1",
    )
    assert (
        bot.compose_argument(ctx)
        == "fuchsia is a valid colors entry because it denotes a purplish hue."
    )


def test_contrarian_challenges_unknown_words():
    lex = parse_lexicon("France\tplaces\n")
    bot = ContrarianBot("critic", lex)
    entries = [
        {"ref": {"round": 1, "author_id": "p2", "category_index": 1}, "raw": "France", "normalized": "france", "status": "PENDING"},
        {"ref": {"round": 1, "author_id": "p2", "category_index": 5}, "raw": "fuchsia", "normalized": "fuchsia", "status": "PENDING"},
        {"ref": {"round": 1, "author_id": "p1", "category_index": 5}, "raw": "flax", "normalized": "flax", "status": "PENDING"},
    ]
    refs = bot.decide_challenges(make_ctx(phase="REVEAL", entries=entries))
    assert refs == [WordRef(1, "p2", 5)]  # own word and known word skipped


def test_passive_bot_abstains():
    bot = PassiveBot("quiet")
    assert bot.decide_challenges(make_ctx(phase="REVEAL")) == []
    assert bot.decide_vote(make_ctx(phase="VOTING")) == ABSTAIN


def test_random_bot_deterministic_under_seed():
    first = RandomBot("r", seed=7).propose_words(make_ctx())
    second = RandomBot("r", seed=7).propose_words(make_ctx())
    assert first == second
    assert len(first) == len(SIX)


# -- adapter sanitization ----------------------------------------------------------


class BrokenPolicy(BotPolicy):
    def propose_words(self, ctx):
        return [
            (0, "fig"),
            (0, "fennel"),  # duplicate category
            (99, "fox"),  # out of range
            ("not-a-category", "fizz"),
            (2, ""),  # blank
            (3, "fern"),
        ]

    def decide_challenges(self, ctx):
        return [
            WordRef(1, "p1", 0),  # self
            WordRef(1, "p2", 0),
            WordRef(1, "p2", 0),  # duplicate
            "garbage",
            WordRef(1, "p9", 3),  # unknown entry
        ]

    def compose_argument(self, ctx):
        return "x" * 5000

    def decide_vote(self, ctx):
        return "MAYBE"


def test_adapter_sanitizes_proposals():
    adapter = BotAdapter(BrokenPolicy("broken"))
    attach(adapter)
    actions = adapter.on_frame(
        frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 99, "categories": list(SIX)})
    )
    assert len(actions) == 1
    ftype, payload = actions[0]
    assert ftype == proto.SUBMIT_WORDS
    assert payload["entries"] == [{"category": 0, "word": "fig"}, {"category": 3, "word": "fern"}]


def test_adapter_filters_challenges():
    adapter = BotAdapter(BrokenPolicy("broken"))
    attach(adapter)
    adapter.on_frame(frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 9, "categories": list(SIX)}))
    entries = [
        {"ref": {"round": 1, "author_id": "p1", "category_index": 0}, "raw": "fig", "normalized": "fig", "status": "PENDING"},
        {"ref": {"round": 1, "author_id": "p2", "category_index": 0}, "raw": "fox", "normalized": "fox", "status": "PENDING"},
    ]
    actions = adapter.on_frame(frame(proto.REVEAL, {"round": 1, "letter": "F", "entries": entries, "deadline": 99}))
    assert actions == [(proto.CHALLENGE, {"round": 1, "author": "p2", "category": 0})]


def test_adapter_clips_long_arguments_and_drops_bad_votes():
    adapter = BotAdapter(BrokenPolicy("broken"))
    attach(adapter)
    adapter.on_frame(frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 9, "categories": list(SIX)}))
    debate = {
        "word_ref": {"round": 1, "author_id": "p1", "category_index": 0},
        "author_id": "p1",
        "challengers": ["p2"],
        "word": "fig",
        "category_index": 0,
        "deadline": 99,
        "position": 1,
        "total": 1,
    }
    actions = adapter.on_frame(frame(proto.DEBATE_OPEN, debate))
    assert len(actions) == 1
    assert len(actions[0][1]["text"]) == 2000
    vote_actions = adapter.on_frame(
        frame(proto.VOTE_OPEN, {"word_ref": debate["word_ref"], "deadline": 99})
    )
    assert vote_actions == []


def test_adapter_enforces_debate_floor_budget():
    class Chatty(BotPolicy):
        def compose_argument(self, ctx):
            return "again!"

    adapter = BotAdapter(Chatty("chatty"))
    attach(adapter, player_id="p3")  # neither author nor challenger: budget 1
    adapter.on_frame(frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 9, "categories": list(SIX)}))
    debate = {
        "word_ref": {"round": 1, "author_id": "p1", "category_index": 0},
        "author_id": "p1",
        "challengers": ["p2"],
        "word": "fig",
        "category_index": 0,
        "deadline": 99,
        "position": 1,
        "total": 1,
    }
    first = adapter.on_frame(frame(proto.DEBATE_OPEN, debate))
    second = adapter.on_frame(frame(proto.DEBATE_OPEN, debate))
    assert len(first) == 1
    assert second == []


def test_adapter_abstain_sends_nothing():
    adapter = BotAdapter(PassiveBot("quiet"))
    attach(adapter)
    adapter.on_frame(frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 9, "categories": list(SIX)}))
    actions = adapter.on_frame(
        frame(proto.VOTE_OPEN, {"word_ref": {"round": 1, "author_id": "p2", "category_index": 0}, "deadline": 9})
    )
    assert actions == []


def test_adapter_survives_raising_policy():
    class Exploding(BotPolicy):
        def propose_words(self, ctx):
            raise RuntimeError("boom")

    adapter = BotAdapter(Exploding("bad"))
    attach(adapter)
    actions = adapter.on_frame(
        frame(proto.ROUND_START, {"round": 1, "letter": "F", "deadline": 9, "categories": list(SIX)})
    )
    assert actions == [(proto.SUBMIT_WORDS, {"round": 1, "entries": []})]
