"""Tournament statistics from game transcripts.

Counts per player (keyed by display name and kind so human/artificial
comparisons fall out directly):

- ``words_submitted``: nonblank entries standing when submissions closed
  (a blank slot is not a submitted word).
- ``auto_rejected``: nonblank entries that failed the mechanical letter
  check.
- ``contested_as_author`` / ``contested_won``: words that were challenged,
  and the subset that survived their vote.
- ``challenges_raised`` / ``challenges_upheld``: distinct words a player
  challenged, and the subset the vote rejected.
- ``arguments_sent``, ``final_score``: as named.

``persuasion_rate`` is contested_won over contested_as_author and
``challenge_success_rate`` is challenges_upheld over challenges_raised,
both with a guarded denominator.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from participation_game.core import Game, WordStatus
from participation_game.transcript import replay

CSV_COLUMNS = (
    "name",
    "kind",
    "games",
    "words_submitted",
    "auto_rejected",
    "contested_as_author",
    "contested_won",
    "challenges_raised",
    "challenges_upheld",
    "arguments_sent",
    "final_score",
    "persuasion_rate",
    "challenge_success_rate",
)


@dataclass
class PlayerStats:
    name: str
    kind: str
    games: int = 0
    words_submitted: int = 0
    auto_rejected: int = 0
    contested_as_author: int = 0
    contested_won: int = 0
    challenges_raised: int = 0
    challenges_upheld: int = 0
    arguments_sent: int = 0
    final_score: int = 0

    @property
    def persuasion_rate(self) -> float:
        return round(self.contested_won / max(self.contested_as_author, 1), 6)

    @property
    def challenge_success_rate(self) -> float:
        return round(self.challenges_upheld / max(self.challenges_raised, 1), 6)

    def to_dict(self) -> dict:
        row = {column: getattr(self, column) for column in CSV_COLUMNS[:-2]}
        row["persuasion_rate"] = self.persuasion_rate
        row["challenge_success_rate"] = self.challenge_success_rate
        return row


def accumulate_game(table: dict[tuple[str, str], PlayerStats], game: Game) -> None:
    """Fold one finished game into the stats table."""
    rows: dict[str, PlayerStats] = {}
    for participant in game.participants.values():
        key = (participant.display_name, participant.kind.value)
        if key not in table:
            table[key] = PlayerStats(name=key[0], kind=key[1])
        row = table[key]
        row.games += 1
        row.final_score += game.scoreboard.get(participant.id, 0)
        rows[participant.id] = row
    for round_state in game.rounds:
        for entry in round_state.entries():
            if not entry.raw:
                continue
            rows[entry.author].words_submitted += 1
            if entry.status is WordStatus.AUTO_REJECTED:
                rows[entry.author].auto_rejected += 1
        for ref in round_state.contested_queue:
            entry = round_state.entry(ref)
            rows[ref.author].contested_as_author += 1
            if entry.status is WordStatus.APPROVED:
                rows[ref.author].contested_won += 1
            for challenger in round_state.challengers.get(ref, []):
                rows[challenger].challenges_raised += 1
                if entry.status is WordStatus.REJECTED:
                    rows[challenger].challenges_upheld += 1
        for argument in round_state.transcript:
            rows[argument.author].arguments_sent += 1


def compute_stats(paths: Iterable[Union[str, Path]]) -> list[PlayerStats]:
    """Replay each transcript and aggregate; order-independent by design."""
    table: dict[tuple[str, str], PlayerStats] = {}
    for path in paths:
        accumulate_game(table, replay(path))
    return [table[key] for key in sorted(table)]


def render_json(rows: list[PlayerStats]) -> str:
    return json.dumps(
        {"players": [row.to_dict() for row in rows]},
        indent=2,
        sort_keys=True,
        ensure_ascii=False,
    ) + "\n"


def render_csv(rows: list[PlayerStats]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_dict())
    return buffer.getvalue()
