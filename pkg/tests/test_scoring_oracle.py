"""score_round versus the independent pairwise scorer, exhaustively over
small instances built from the bundled ten-word fixture pool."""

import random

import pytest

from participation_game.core import score_round
from tests.oracles import (
    brute_force_score,
    enumerate_rounds,
    make_terminal_round,
    slot_options,
)

# Ten words drawn from the fixture lexicon. Scoring only compares normalized
# equality within a category, so two-three distinct words per category
# already produce every duplicate structure three players can form; the
# full pool is exercised in the single-category sweep and by sampling.
TEN_WORDS = [
    "fruit",
    "France",
    "Frank",
    "Fargo",
    "flamingos",
    "fuchsia",
    "fig",
    "fern",
    "fox",
    "fizz",
]


def assert_matches_oracle(round_state):
    events = score_round(round_state)
    got = {(e.player, e.category_index): e.points for e in events}
    expected = brute_force_score(round_state)
    assert got == expected


def test_single_category_full_pool_exhaustive():
    checked = 0
    for n_players in (1, 2, 3):
        players = [f"p{i}" for i in range(1, n_players + 1)]
        for round_state in enumerate_rounds(players, 1, TEN_WORDS):
            assert_matches_oracle(round_state)
            checked += 1
    assert checked == 22 + 22**2 + 22**3


@pytest.mark.parametrize("n_players,n_categories", [(2, 2), (1, 3), (3, 2), (2, 3)])
def test_small_shapes_two_word_pool_exhaustive(n_players, n_categories):
    players = [f"p{i}" for i in range(1, n_players + 1)]
    for round_state in enumerate_rounds(players, n_categories, ["France", "fig"]):
        assert_matches_oracle(round_state)


def test_three_by_three_single_word_exhaustive():
    players = ["p1", "p2", "p3"]
    for round_state in enumerate_rounds(players, 3, ["France"], include_blank=False):
        assert_matches_oracle(round_state)


def test_three_by_three_full_pool_sampled():
    rng = random.Random(20240117)
    players = ["p1", "p2", "p3"]
    options = slot_options(TEN_WORDS)
    cells = [(p, c) for p in players for c in range(3)]
    for _ in range(3000):
        slots = {cell: rng.choice(options) for cell in cells}
        assert_matches_oracle(make_terminal_round(players, 3, slots))


def test_duplicate_symmetry_in_events():
    round_state = make_terminal_round(
        ["p1", "p2"], 1, {("p1", 0): ("France", True), ("p2", 0): ("france", True)}
    )
    events = {e.player: e.points for e in score_round(round_state)}
    assert events == {"p1": 1, "p2": 1}
