"""Participation game: a Categories-style word game played by humans and
disclosed artificial participants, with a rules engine, websocket server,
bot SDK, headless simulator, and replayable transcripts."""

from participation_game.core import (
    Ballot,
    Game,
    GameConfig,
    GameError,
    Kind,
    Participant,
    Phase,
    WordRef,
    WordStatus,
)

__version__ = "0.1.0"

__all__ = [
    "Ballot",
    "Game",
    "GameConfig",
    "GameError",
    "Kind",
    "Participant",
    "Phase",
    "WordRef",
    "WordStatus",
    "__version__",
]
