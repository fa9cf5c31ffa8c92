"""Event log and replay: gapless sequencing, corruption reporting, and
state reconstruction equal to the live run."""

import json

import pytest

from participation_game.core import GameConfig, Kind
from participation_game.session import GameSession
from participation_game.transcript import (
    CorruptLog,
    EventLog,
    SequenceGap,
    StorageFailure,
    make_event,
    replay,
    replay_events,
)


@pytest.fixture
def log_path(tmp_path):
    return tmp_path / "game.jsonl"


def small_config(**overrides):
    defaults = dict(
        categories=("foods", "places"),
        alphabet=("F", "G", "H"),
        min_players=2,
        max_players=4,
        max_rounds=1,
        rng_seed=5,
    )
    defaults.update(overrides)
    return GameConfig(**defaults)


def play_one_game(path):
    """A complete two-player game, driven directly through the session."""
    session = GameSession(
        "g1",
        small_config(),
        EventLog.open(path),
        created_ms=0,
        lobby_grace_seconds=0.0,
        token_factory=lambda: "tok",
    )
    session.join("Ada", Kind.HUMAN.value, now_ms=0)
    session.join("Bot", Kind.ARTIFICIAL.value, now_ms=0)
    session.tick(0)  # lobby grace elapsed: round opens
    letter = session.game.current_round.letter
    session.handle_frame(
        "p1", "SUBMIT_WORDS", {"round": 1, "entries": [{"category": 0, "word": letter + "ig"}]}, 10
    )
    session.handle_frame("p2", "SUBMIT_WORDS", {"round": 1, "entries": []}, 11)
    # All connected players submitted, so submissions already closed.
    session.tick(session.next_deadline_ms())  # close reveal -> scores -> game over
    session.writer.close()
    return session.game


# -- EventLog ---------------------------------------------------------------


def test_append_assigns_gapless_sequence(log_path):
    log = EventLog.open(log_path)
    log.append(make_event(0, 0, "config", {"game_id": "g", "config": small_config().to_dict()}))
    log.append(make_event(1, 1, "join", {"id": "p1", "name": "Ada", "kind": "HUMAN"}))
    log.close()
    lines = log_path.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["seq"] == 0


def test_append_rejects_sequence_gap(log_path):
    log = EventLog.open(log_path)
    log.append(make_event(0, 0, "config", {"game_id": "g", "config": small_config().to_dict()}))
    with pytest.raises(SequenceGap):
        log.append(make_event(2, 0, "join", {"id": "p1", "name": "A", "kind": "HUMAN"}))


def test_append_wraps_storage_errors(tmp_path):
    stream = (tmp_path / "log.jsonl").open("w")
    stream.close()  # writes now fail
    log = EventLog(stream)
    with pytest.raises(StorageFailure):
        log.append(make_event(0, 0, "config", {"game_id": "g", "config": small_config().to_dict()}))


# -- replay -------------------------------------------------------------------


def test_replay_reproduces_live_scoreboard(log_path):
    live = play_one_game(log_path)
    replayed = replay(log_path)
    assert replayed.scoreboard == live.scoreboard
    assert replayed.used_letters == live.used_letters
    assert replayed.outcome is not None
    assert replayed.outcome.winners == live.outcome.winners


def test_replay_empty_log_is_empty_lobby():
    game = replay_events([])
    assert not game.started
    assert game.participants == {}


def test_replay_truncated_line_reports_line_number(log_path):
    play_one_game(log_path)
    text = log_path.read_text().splitlines()
    broken = "\n".join(text[:-1] + [text[-1][: len(text[-1]) // 2]]) + "\n"
    log_path.write_text(broken)
    with pytest.raises(CorruptLog) as exc_info:
        replay(log_path)
    assert exc_info.value.line == len(text)


def test_replay_sequence_gap_is_corrupt(log_path):
    play_one_game(log_path)
    lines = log_path.read_text().splitlines()
    del lines[2]
    log_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptLog) as exc_info:
        replay(log_path)
    assert exc_info.value.line == 3


def test_replay_detects_tampered_audit_fields(log_path):
    play_one_game(log_path)
    lines = log_path.read_text().splitlines()
    for index, line in enumerate(lines):
        event = json.loads(line)
        if event["kind"] == "open_round":
            event["payload"]["letter"] = "G" if event["payload"]["letter"] != "G" else "H"
            lines[index] = json.dumps(event)
            break
    log_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptLog):
        replay(log_path)


def test_replay_rejects_missing_fields(log_path):
    log_path.write_text('{"seq": 0, "kind": "config"}\n')
    with pytest.raises(CorruptLog) as exc_info:
        replay(log_path)
    assert exc_info.value.line == 1
