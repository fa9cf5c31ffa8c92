"""Session driver: lobby auto-start, reconnect tokens, frame validation,
early submission close, broadcast sequencing, and the full phase cascade."""

import itertools

import pytest

from participation_game import session as proto
from participation_game.core import GameConfig, Kind
from participation_game.session import GameSession, SessionError


def make_session(**overrides) -> GameSession:
    defaults = dict(
        categories=("foods", "places"),
        alphabet=("F", "G", "H", "I"),
        min_players=2,
        max_players=4,
        debate_seconds=10,
        vote_seconds=5,
        rng_seed=3,
    )
    grace = overrides.pop("grace", 0.0)
    defaults.update(overrides)
    counter = itertools.count(1)
    return GameSession(
        "g1",
        GameConfig(**defaults),
        writer=None,
        created_ms=0,
        lobby_grace_seconds=grace,
        token_factory=lambda: f"token-{next(counter)}",
    )


def frames_of(out, ftype):
    return [frame for _, frame in out if frame["type"] == ftype]


def lobby(session, names=("Ada", "Bot")):
    for index, name in enumerate(names):
        kind = Kind.HUMAN.value if index == 0 else Kind.ARTIFICIAL.value
        session.join(name, kind, now_ms=0)
    return session.tick(0)


# -- joining ------------------------------------------------------------------


def test_join_returns_welcome_and_roster():
    session = make_session()
    participant, out = session.join("Ada", "HUMAN", now_ms=0)
    assert participant.id == "p1"
    welcome = frames_of(out, proto.WELCOME)[0]
    assert welcome["payload"]["player_id"] == "p1"
    assert welcome["payload"]["token"] == "token-1"
    assert welcome["payload"]["config"]["victory_points"] == 21
    roster = frames_of(out, proto.ROSTER)[0]
    assert [p["name"] for p in roster["payload"]["players"]] == ["Ada"]


def test_join_name_taken():
    session = make_session()
    session.join("Ada", "HUMAN", now_ms=0)
    with pytest.raises(Exception) as exc_info:
        session.join("Ada", "ARTIFICIAL", now_ms=0)
    assert getattr(exc_info.value, "code", "") == "NameTaken"


def test_join_game_full():
    session = make_session(min_players=4, max_players=4, grace=9999)
    for name in ("Ada", "Ben", "Cal", "BotD"):
        kind = "ARTIFICIAL" if name == "BotD" else "HUMAN"
        session.join(name, kind, now_ms=0)
    # Roster hit max_players with an artificial participant: starts at once.
    assert session.game.started
    with pytest.raises(SessionError) as exc_info:
        session.join("Eve", "HUMAN", now_ms=0)
    assert exc_info.value.code == "GameStartedNoToken"


def test_join_after_start_without_token():
    session = make_session()
    lobby(session)
    with pytest.raises(SessionError) as exc_info:
        session.join("Late", "HUMAN", now_ms=5)
    assert exc_info.value.code == "GameStartedNoToken"


def test_reconnect_with_token_restores_participant():
    session = make_session()
    lobby(session)
    session.leave("p1", now_ms=10)
    assert session.game.participants["p1"].connected is False
    participant, out = session.join("ignored", "HUMAN", now_ms=20, token="token-1")
    assert participant.id == "p1"
    assert participant.display_name == "Ada"
    assert session.game.participants["p1"].connected is True
    welcome = frames_of(out, proto.WELCOME)[0]
    assert welcome["payload"]["state"]["round"]["phase"] == "SUBMISSION"


def test_kind_immutable_across_reconnect():
    session = make_session()
    lobby(session)
    participant, _ = session.join("x", "ARTIFICIAL", now_ms=20, token="token-1")
    assert participant.kind is Kind.HUMAN  # declared at first join, immutable


def test_malformed_kind_rejected():
    session = make_session()
    with pytest.raises(SessionError) as exc_info:
        session.join("Ada", "CYBORG", now_ms=0)
    assert exc_info.value.code == "MalformedFrame"


# -- lobby auto-start ----------------------------------------------------------


def test_lobby_waits_for_artificial_participant():
    session = make_session(grace=0)
    session.join("Ada", "HUMAN", now_ms=0)
    session.join("Ben", "HUMAN", now_ms=0)
    assert session.next_deadline_ms() is None
    session.tick(10_000)
    assert not session.game.started
    session.join("Bot", "ARTIFICIAL", now_ms=10_000)
    out = session.tick(10_000)
    assert session.game.started
    assert frames_of(out, proto.ROUND_START)


def test_lobby_grace_deadline():
    session = make_session(grace=5.0)
    session.join("Ada", "HUMAN", now_ms=1000)
    session.join("Bot", "ARTIFICIAL", now_ms=2000)
    assert session.next_deadline_ms() == 7000
    assert session.tick(6999) == []
    out = session.tick(7000)
    assert frames_of(out, proto.ROUND_START)


# -- frame handling --------------------------------------------------------------


def test_submit_wrong_round_rejected():
    session = make_session()
    lobby(session)
    with pytest.raises(Exception) as exc_info:
        session.handle_frame("p1", proto.SUBMIT_WORDS, {"round": 7, "entries": []}, 10)
    assert getattr(exc_info.value, "code", "") == "WrongPhase"


def test_submit_broadcasts_roster_ack():
    session = make_session()
    lobby(session)
    out = session.handle_frame(
        "p1", proto.SUBMIT_WORDS, {"round": 1, "entries": [{"category": 0, "word": "fig"}]}, 10
    )
    roster = frames_of(out, proto.ROSTER)[0]
    flags = {p["name"]: p["submitted"] for p in roster["payload"]["players"]}
    assert flags == {"Ada": True, "Bot": False}


def test_all_submitted_closes_early():
    session = make_session()
    lobby(session)
    session.handle_frame("p1", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 10)
    out = session.handle_frame("p2", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 12)
    reveal = frames_of(out, proto.REVEAL)[0]
    assert reveal["payload"]["deadline"] == 12 + 10_000


def test_disconnected_player_does_not_block_early_close():
    session = make_session(min_players=3)
    lobby(session, names=("Ada", "Ben", "Bot"))
    session.leave("p2", now_ms=5)
    out = []
    out += session.handle_frame("p1", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 10)
    out += session.handle_frame("p3", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 11)
    assert frames_of(out, proto.REVEAL)


def test_vote_has_no_broadcast_until_tally():
    session = make_session()
    out = lobby(session)
    letter = session.game.current_round.letter.lower()
    session.handle_frame(
        "p1", proto.SUBMIT_WORDS, {"round": 1, "entries": [{"category": 0, "word": letter + "ig"}]}, 1
    )
    session.handle_frame("p2", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 2)
    session.handle_frame("p2", proto.CHALLENGE, {"round": 1, "author": "p1", "category": 0}, 3)
    out = session.tick(session.next_deadline_ms())  # close reveal -> debate
    ref = frames_of(out, proto.DEBATE_OPEN)[0]["payload"]["word_ref"]
    out = session.tick(session.next_deadline_ms())  # close debate -> voting
    assert frames_of(out, proto.VOTE_OPEN)
    out = session.handle_frame("p2", proto.VOTE, {"word_ref": ref, "choice": "REJECT"}, 100)
    assert out == []


def test_full_phase_cascade_to_game_over():
    session = make_session(max_rounds=1, victory_points=99)
    lobby(session)
    letter = session.game.current_round.letter.lower()
    session.handle_frame(
        "p1", proto.SUBMIT_WORDS, {"round": 1, "entries": [{"category": 0, "word": letter + "ox"}]}, 1
    )
    session.handle_frame("p2", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 2)
    session.handle_frame("p2", proto.CHALLENGE, {"round": 1, "author": "p1", "category": 0}, 3)
    collected = []
    while not session.game.over:
        deadline = session.next_deadline_ms()
        assert deadline is not None
        collected += session.tick(deadline)
    types = [frame["type"] for _, frame in collected]
    assert types == [proto.DEBATE_OPEN, proto.VOTE_OPEN, proto.TALLY, proto.SCORES, proto.GAME_OVER]
    tally = frames_of(collected, proto.TALLY)[0]
    assert tally["payload"]["outcome"] == "REJECTED"  # no ballots cast


def test_broadcast_sequence_is_gapless():
    session = make_session(max_rounds=1)
    collected = []
    for index, name in enumerate(("Ada", "Bot")):
        kind = "HUMAN" if index == 0 else "ARTIFICIAL"
        _, out = session.join(name, kind, now_ms=0)
        collected += out
    collected += session.tick(0)
    collected += session.handle_frame("p1", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 1)
    collected += session.handle_frame("p2", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 2)
    while not session.game.over:
        collected += session.tick(session.next_deadline_ms())
    seqs = [frame["seq"] for target, frame in collected if target == proto.BROADCAST]
    assert seqs == list(range(1, len(seqs) + 1))


def test_unknown_player_frame_rejected():
    session = make_session()
    lobby(session)
    with pytest.raises(SessionError) as exc_info:
        session.handle_frame("ghost", proto.SUBMIT_WORDS, {"round": 1, "entries": []}, 1)
    assert exc_info.value.code == "UnknownPlayer"
