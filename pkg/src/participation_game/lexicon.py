"""Word lexicons for scripted bots.

A lexicon file is newline-delimited UTF-8 with tab-separated fields::

    word<TAB>category[<TAB>note]

The optional note feeds argument templates ("... because <note>"). Lines
starting with ``#`` and blank lines are ignored. Words are matched by their
normalized form, same as the rules engine.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from participation_game.core import normalize_word, rng_next, starts_with_letter


@dataclass
class Lexicon:
    entries: list[tuple[str, str]] = field(default_factory=list)  # (word, category)
    notes: dict[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._by_category: dict[str, list[str]] = {}
        self._known: set[tuple[str, str]] = set()
        for word, category in self.entries:
            self._by_category.setdefault(category, []).append(word)
            self._known.add((normalize_word(word), category))

    def __len__(self) -> int:
        return len(self.entries)

    def contains(self, word: str, category: str) -> bool:
        return (normalize_word(word), category) in self._known

    def words_for(self, category: str, letter: str) -> list[str]:
        return [
            w
            for w in self._by_category.get(category, [])
            if starts_with_letter(normalize_word(w), letter)
        ]

    def note_for(self, word: str, category: str) -> Optional[str]:
        return self.notes.get((normalize_word(word), category))

    def subset(self, keep_ratio: float, seed: int) -> "Lexicon":
        """Deterministic thinned copy; stable across runs and platforms."""
        if not 0.0 <= keep_ratio <= 1.0:
            raise ValueError("keep_ratio must be within [0, 1]")
        threshold = int(keep_ratio * 1_000_000)
        kept: list[tuple[str, str]] = []
        notes: dict[tuple[str, str], str] = {}
        for word, category in self.entries:
            digest = zlib.crc32(f"{word}\t{category}".encode("utf-8"))
            value, _ = rng_next((digest + seed) & ((1 << 64) - 1))
            if value % 1_000_000 < threshold:
                kept.append((word, category))
                key = (normalize_word(word), category)
                if key in self.notes:
                    notes[key] = self.notes[key]
        return Lexicon(kept, notes)


def parse_lexicon(text: str) -> Lexicon:
    entries: list[tuple[str, str]] = []
    notes: dict[tuple[str, str], str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"lexicon line needs word<TAB>category: {line!r}")
        word, category = parts[0].strip(), parts[1].strip()
        entries.append((word, category))
        if len(parts) >= 3 and parts[2].strip():
            notes[(normalize_word(word), category)] = parts[2].strip()
    return Lexicon(entries, notes)


def load_lexicon(path: Union[str, Path]) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def fixture_lexicon() -> Lexicon:
    """The bundled lexicon covering the default categories and alphabet."""
    text = (
        resources.files("participation_game")
        .joinpath("data/fixture_lexicon.tsv")
        .read_text(encoding="utf-8")
    )
    return parse_lexicon(text)
