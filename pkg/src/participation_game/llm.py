"""Text-completion endpoint adapter and the bot built on it.

The wire contract is a single HTTP POST of ``{"prompt", "max_tokens",
"temperature"}`` answered with ``{"text": ...}``. :func:`llm_complete`
wraps it with bounded retries and exponential backoff under an explicit
time budget, so a dead endpoint degrades a bot to blanks, a fallback
template, or an abstention, never a stalled game.

:class:`StubEndpoint` is a tiny threaded server implementing the same
contract for tests and local play; it can echo, answer from a lexicon, or
be forced to fail.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from string import Template
from typing import Callable, Optional, Union

import httpx

from participation_game.bots import ABSTAIN, APPROVE, BotContext, BotPolicy, REJECT, DEFAULT_REASON
from participation_game.core import normalize_word, starts_with_letter
from participation_game.lexicon import Lexicon

logger = logging.getLogger(__name__)

ENV_URL = "PG_LLM_URL"
ENV_KEY = "PG_LLM_KEY"


class Unavailable(Exception):
    """The endpoint could not produce a completion within the budget."""


class MalformedResponse(Exception):
    """The endpoint answered, but not with the agreed shape."""


@dataclass
class EndpointConfig:
    url: str
    api_key: str = ""
    timeout_seconds: float = 10.0
    max_attempts: int = 3
    backoff_seconds: float = 0.5
    max_response_bytes: int = 65536
    max_tokens: int = 64
    temperature: float = 0.7

    @classmethod
    def from_env(cls, **overrides) -> "EndpointConfig":
        url = os.environ.get(ENV_URL, "")
        if not url:
            raise Unavailable(f"{ENV_URL} is not set")
        return cls(url=url, api_key=os.environ.get(ENV_KEY, ""), **overrides)


def llm_complete(
    prompt: str, config: EndpointConfig, budget_seconds: Optional[float] = None
) -> str:
    """One completion with retries; never runs past ``budget_seconds``."""
    headers = {}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    body = {
        "prompt": prompt,
        "max_tokens": config.max_tokens,
        "temperature": config.temperature,
    }
    started = time.monotonic()
    last_error = "no attempts made"
    for attempt in range(config.max_attempts):
        remaining = None
        if budget_seconds is not None:
            remaining = budget_seconds - (time.monotonic() - started)
            if remaining <= 0:
                break
        timeout = config.timeout_seconds if remaining is None else min(config.timeout_seconds, remaining)
        try:
            response = httpx.post(config.url, json=body, headers=headers, timeout=timeout)
        except httpx.HTTPError as exc:
            last_error = f"transport error: {exc}"
        else:
            if response.status_code == 200:
                if len(response.content) > config.max_response_bytes:
                    raise MalformedResponse(
                        f"response exceeds {config.max_response_bytes} bytes"
                    )
                try:
                    data = response.json()
                except json.JSONDecodeError as exc:
                    raise MalformedResponse(f"invalid JSON: {exc}") from exc
                if not isinstance(data, dict) or not isinstance(data.get("text"), str):
                    raise MalformedResponse("reply must be an object with a 'text' string")
                return data["text"]
            last_error = f"status {response.status_code}"
            if response.status_code < 500 and response.status_code != 429:
                # Client errors will not heal on retry.
                break
        if attempt + 1 < config.max_attempts:
            delay = config.backoff_seconds * (2**attempt)
            if budget_seconds is not None:
                delay = min(delay, max(0.0, budget_seconds - (time.monotonic() - started)))
            time.sleep(delay)
    raise Unavailable(last_error)


# -- prompt templates --------------------------------------------------------


def _bundled_template(name: str) -> Template:
    text = (
        resources.files("participation_game")
        .joinpath(f"data/prompts/{name}.txt")
        .read_text(encoding="utf-8")
    )
    return Template(text)


def load_templates(directory: Optional[Union[str, Path]] = None) -> dict[str, Template]:
    """Prompt templates by task; a directory of ``<task>.txt`` overrides."""
    templates = {}
    for task in ("propose", "argue", "vote"):
        if directory is not None:
            path = Path(directory) / f"{task}.txt"
            templates[task] = Template(path.read_text(encoding="utf-8"))
        else:
            templates[task] = _bundled_template(task)
    return templates


class LlmBot(BotPolicy):
    """A participant whose words, arguments, and votes come from the endpoint.

    Whenever the endpoint is unavailable or malformed it degrades per
    decision: blank words, a template argument, an abstained vote.
    """

    def __init__(
        self,
        display_name: str,
        endpoint: EndpointConfig,
        prompt_dir: Optional[Union[str, Path]] = None,
        budget_fraction: float = 0.8,
    ):
        super().__init__(display_name)
        self.endpoint = endpoint
        self.templates = load_templates(prompt_dir)
        self.budget_fraction = budget_fraction
        self._broken_round: Optional[int] = None

    def _budget(self, ctx: BotContext) -> float:
        # Stay well inside the phase window; the deadline is absolute but
        # the bot cannot see wall-clock skew, so a conservative flat cap
        # tied to the shortest phase keeps retries from outliving any vote.
        shortest = min(
            ctx.config.submission_seconds,
            ctx.config.debate_seconds,
            ctx.config.vote_seconds,
        )
        return max(0.5, self.budget_fraction * shortest)

    def _complete(self, task: str, ctx: BotContext, **extra) -> Optional[str]:
        mapping = {
            "name": self.display_name,
            "letter": ctx.letter,
            "round": ctx.round_number,
            "categories": ", ".join(ctx.config.categories),
            "transcript": "\n".join(
                f"{a.get('author_id', '?')}: {a.get('text', '')}" for a in ctx.transcript
            ),
            **extra,
        }
        prompt = self.templates[task].safe_substitute(mapping)
        try:
            return llm_complete(prompt, self.endpoint, budget_seconds=self._budget(ctx))
        except (Unavailable, MalformedResponse) as exc:
            logger.warning("%s: completion failed (%s); falling back", self.display_name, exc)
            return None

    def propose_words(self, ctx: BotContext) -> list[tuple[int, str]]:
        proposals = []
        for index, label in enumerate(ctx.config.categories):
            if self._broken_round == ctx.round_number:
                break  # endpoint already failed this round; stay blank
            text = self._complete("propose", ctx, category=label)
            if text is None:
                self._broken_round = ctx.round_number
                break
            word = text.strip().splitlines()[0].strip() if text.strip() else ""
            if word and starts_with_letter(normalize_word(word), ctx.letter):
                proposals.append((index, word))
        return proposals

    def compose_argument(self, ctx: BotContext) -> str:
        if not (ctx.is_author or ctx.is_challenger):
            return ""
        label = ctx.category_label(ctx.contested_category)
        stance = "for" if ctx.is_author else "against"
        text = self._complete(
            "argue",
            ctx,
            category=label,
            word=ctx.contested_word,
            role="author" if ctx.is_author else "challenger",
            stance=stance,
        )
        if text and text.strip():
            return text.strip()
        # Endpoint down: a plain template keeps the bot in the conversation.
        if ctx.is_author:
            return f"{normalize_word(ctx.contested_word)} is a valid {label} entry because {DEFAULT_REASON}."
        return f"I am not convinced {normalize_word(ctx.contested_word)} belongs under {label}."

    def decide_vote(self, ctx: BotContext) -> str:
        label = ctx.category_label(ctx.contested_category)
        text = self._complete("vote", ctx, category=label, word=ctx.contested_word)
        if text is None:
            return ABSTAIN
        upper = text.strip().upper()
        if upper.startswith(APPROVE):
            return APPROVE
        if upper.startswith(REJECT):
            return REJECT
        return ABSTAIN


# -- stub endpoint -----------------------------------------------------------


def echo_responder(prompt: str) -> str:
    return prompt


def lexicon_responder(lexicon: Lexicon) -> Callable[[str], str]:
    """Answer game prompts from a lexicon, by parsing the template markers."""

    def find(field: str, prompt: str) -> str:
        match = re.search(rf"^{field}:\s*(.*)$", prompt, flags=re.MULTILINE)
        return match.group(1).strip() if match else ""

    def respond(prompt: str) -> str:
        task = find("task", prompt)
        letter = find("letter", prompt)
        category = find("category", prompt)
        word = find("word", prompt)
        if task == "propose":
            matches = lexicon.words_for(category, letter) if letter else []
            return matches[0] if matches else ""
        if task == "vote":
            return APPROVE if lexicon.contains(word, category) else REJECT
        if task == "argue":
            note = lexicon.note_for(word, category)
            if note:
                return f"{normalize_word(word)} is a valid {category} entry because {note}."
            return f"My references do not list {normalize_word(word)} under {category}."
        return ""

    return respond


class StubEndpoint:
    """In-process completion endpoint for tests and local games.

    ``fail_times`` forces that many 500s before succeeding; ``fail_all``
    forces every request to fail. ``delay_seconds`` sleeps before replying,
    for timeout drills.
    """

    def __init__(
        self,
        responder: Callable[[str], str] = echo_responder,
        *,
        fail_times: int = 0,
        fail_all: bool = False,
        status: int = 500,
        delay_seconds: float = 0.0,
        host: str = "127.0.0.1",
        port: int = 0,
    ):
        self.responder = responder
        self.fail_remaining = fail_times
        self.fail_all = fail_all
        self.fail_status = status
        self.delay_seconds = delay_seconds
        self.request_count = 0
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:
                with stub._lock:
                    stub.request_count += 1
                    fail = stub.fail_all or stub.fail_remaining > 0
                    if stub.fail_remaining > 0:
                        stub.fail_remaining -= 1
                if stub.delay_seconds:
                    time.sleep(stub.delay_seconds)
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                if fail:
                    self.send_response(stub.fail_status)
                    self.end_headers()
                    return
                try:
                    prompt = json.loads(raw)["prompt"]
                    text = stub.responder(prompt)
                except Exception:
                    self.send_response(400)
                    self.end_headers()
                    return
                body = json.dumps({"text": text}).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, fmt: str, *args) -> None:
                logger.debug("stub endpoint: " + fmt, *args)

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/"

    def start(self) -> "StubEndpoint":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubEndpoint":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
