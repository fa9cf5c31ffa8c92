// DOM rendering. Everything on screen derives from the ViewState fold; the
// handlers passed in are the only way user input leaves the page, and each
// one re-checks the phase gate before building a frame.

import { formatCountdown, remainingMs } from "./countdown.js";
import { RevealedEntry, WordRef } from "./protocol.js";
import {
  ViewState,
  canArgue,
  canChallenge,
  canSubmit,
  canVote,
  displayName,
  isArtificial,
} from "./state.js";

export interface Handlers {
  submitWords(entries: { category: number; word: string }[]): void;
  challenge(ref: WordRef): void;
  argue(text: string): void;
  vote(choice: "APPROVE" | "REJECT"): void;
}

export interface Drafts {
  words: Map<number, string>;
  argument: string;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function nameTag(state: ViewState, playerId: string): HTMLElement {
  const wrap = el("span", "name-tag");
  wrap.append(el("span", "name", displayName(state, playerId)));
  if (isArtificial(state, playerId)) {
    wrap.append(el("span", "badge-ai", "ARTIFICIAL"));
  }
  return wrap;
}

export function renderBanner(state: ViewState, clientNowMs: number): HTMLElement {
  const banner = el("div", "banner");
  const phase = el("span", "phase", state.phase);
  banner.append(phase);
  if (state.round > 0 && state.phase !== "OVER") {
    banner.append(el("span", "round", `round ${state.round}`));
    banner.append(el("span", "letter", state.letter));
  }
  if (["SUBMISSION", "REVEAL", "DEBATE", "VOTING"].includes(state.phase)) {
    const left = remainingMs(state.deadline, state.clockDeltaMs, clientNowMs);
    const clock = el("span", "countdown", formatCountdown(left));
    if (left < 10_000) clock.classList.add("urgent");
    banner.append(clock);
  }
  return banner;
}

export function renderRoster(state: ViewState): HTMLElement {
  const panel = el("div", "roster");
  panel.append(el("h3", undefined, "players"));
  for (const player of state.roster) {
    const row = el("div", "roster-row");
    const dot = el("span", player.connected ? "dot online" : "dot offline");
    row.append(dot, nameTag(state, player.id));
    if (player.submitted) row.append(el("span", "submitted", "✓"));
    if (player.id === state.playerId) row.append(el("span", "you", "(you)"));
    panel.append(row);
  }
  return panel;
}

export function renderScoreboard(state: ViewState): HTMLElement {
  const panel = el("div", "scoreboard");
  panel.append(el("h3", undefined, "scores"));
  const rows = Object.entries(state.board).sort(
    (a, b) => b[1] - a[1] || displayName(state, a[0]).localeCompare(displayName(state, b[0])),
  );
  for (const [playerId, score] of rows) {
    const row = el("div", "score-row");
    row.append(nameTag(state, playerId), el("span", "points", String(score)));
    panel.append(row);
  }
  return panel;
}

function renderSubmission(state: ViewState, drafts: Drafts, handlers: Handlers): HTMLElement {
  const panel = el("div", "panel submission");
  panel.append(
    el("h2", undefined, `words starting with "${state.letter}"`),
  );
  const grid = el("div", "category-grid");
  const categories = state.config?.categories ?? [];
  categories.forEach((label, index) => {
    const cell = el("label", "category-cell");
    cell.append(el("span", "category-label", label));
    const input = el("input");
    input.type = "text";
    input.value = drafts.words.get(index) ?? "";
    input.placeholder = `${state.letter.toLowerCase()}…`;
    input.addEventListener("input", () => drafts.words.set(index, input.value));
    cell.append(input);
    grid.append(cell);
  });
  panel.append(grid);
  const send = el("button", "primary", "submit words");
  send.disabled = !canSubmit(state);
  send.addEventListener("click", () => {
    const entries = [...drafts.words.entries()]
      .filter(([, word]) => word.trim() !== "")
      .map(([category, word]) => ({ category, word }));
    handlers.submitWords(entries);
  });
  panel.append(send);
  panel.append(el("p", "hint", "resubmitting before the deadline overwrites your words"));
  return panel;
}

function statusChip(status: string): HTMLElement {
  return el("span", `chip status-${status.toLowerCase()}`, status.replaceAll("_", " ").toLowerCase());
}

function renderReveal(state: ViewState, handlers: Handlers): HTMLElement {
  const panel = el("div", "panel reveal");
  panel.append(el("h2", undefined, "the reveal: challenge anything that does not belong"));
  const byPlayer = new Map<string, RevealedEntry[]>();
  for (const entry of state.entries) {
    const list = byPlayer.get(entry.ref.author_id) ?? [];
    list.push(entry);
    byPlayer.set(entry.ref.author_id, list);
  }
  const categories = state.config?.categories ?? [];
  for (const [playerId, entries] of byPlayer) {
    const block = el("div", "reveal-block");
    const head = el("div", "reveal-head");
    head.append(nameTag(state, playerId));
    block.append(head);
    const table = el("div", "reveal-table");
    for (const entry of entries) {
      const row = el("div", "reveal-row");
      row.append(el("span", "category-label", categories[entry.ref.category_index] ?? ""));
      row.append(el("span", "word", entry.raw || "—"));
      row.append(statusChip(entry.status));
      if (canChallenge(state, entry)) {
        const btn = el("button", "challenge", "challenge");
        btn.addEventListener("click", () => handlers.challenge(entry.ref));
        row.append(btn);
      }
      table.append(row);
    }
    block.append(table);
    panel.append(block);
  }
  return panel;
}

function renderDebate(state: ViewState, drafts: Drafts, handlers: Handlers): HTMLElement {
  const panel = el("div", "panel debate");
  const debate = state.debate;
  if (!debate) return panel;
  const categories = state.config?.categories ?? [];
  const card = el("div", "debate-card");
  card.append(el("h2", undefined, `"${debate.word}"`));
  card.append(
    el(
      "p",
      "debate-meta",
      `claimed as ${categories[debate.category_index] ?? "?"} · contest ${debate.position} of ${debate.total}`,
    ),
  );
  const parties = el("p", "debate-parties");
  parties.append("author: ", nameTag(state, debate.author_id));
  if (debate.challengers.length > 0) {
    parties.append(" · challenged by: ");
    debate.challengers.forEach((challenger, index) => {
      if (index > 0) parties.append(", ");
      parties.append(nameTag(state, challenger));
    });
  }
  card.append(parties);
  panel.append(card);

  const transcript = el("div", "transcript");
  for (const message of state.transcript) {
    const line = el("div", "argument");
    line.append(nameTag(state, message.author_id), el("span", "text", message.text));
    transcript.append(line);
  }
  panel.append(transcript);

  if (state.phase === "DEBATE") {
    const compose = el("div", "compose");
    const input = el("textarea");
    input.value = drafts.argument;
    input.placeholder = "make your case…";
    input.maxLength = 2000;
    input.addEventListener("input", () => (drafts.argument = input.value));
    const send = el("button", "primary", "argue");
    send.disabled = !canArgue(state);
    send.addEventListener("click", () => {
      if (drafts.argument.trim()) handlers.argue(drafts.argument);
    });
    compose.append(input, send);
    panel.append(compose);
  }

  if (state.phase === "VOTING") {
    const votePanel = el("div", "vote-panel");
    votePanel.append(el("p", undefined, "does this word count?"));
    const approve = el("button", "approve", "approve");
    const reject = el("button", "reject", "reject");
    approve.disabled = reject.disabled = !canVote(state);
    approve.addEventListener("click", () => handlers.vote("APPROVE"));
    reject.addEventListener("click", () => handlers.vote("REJECT"));
    votePanel.append(approve, reject);
    panel.append(votePanel);
  }
  return panel;
}

function renderGameOver(state: ViewState): HTMLElement {
  const panel = el("div", "panel game-over");
  panel.append(el("h2", undefined, "game over"));
  if (state.ranking) {
    const winners = new Set(state.winners);
    const table = el("div", "ranking");
    state.ranking.forEach((row, index) => {
      const line = el("div", winners.has(row.player_id) ? "rank-row winner" : "rank-row");
      line.append(el("span", "place", `${index + 1}.`));
      line.append(nameTag(state, row.player_id));
      line.append(el("span", "points", String(row.score)));
      if (winners.has(row.player_id)) line.append(el("span", "trophy", "★"));
      table.append(line);
    });
    panel.append(table);
  }
  return panel;
}

export function renderMain(state: ViewState, drafts: Drafts, handlers: Handlers): HTMLElement {
  switch (state.phase) {
    case "CONNECTING":
      return el("div", "panel", "connecting…");
    case "LOBBY":
      return el("div", "panel", "waiting for players…");
    case "SUBMISSION":
      return renderSubmission(state, drafts, handlers);
    case "REVEAL":
      return renderReveal(state, handlers);
    case "DEBATE":
    case "VOTING":
      return renderDebate(state, drafts, handlers);
    case "SCORED":
      return el("div", "panel", "round scored; next round starting…");
    case "OVER":
      return renderGameOver(state);
  }
}

export function renderErrors(state: ViewState): HTMLElement {
  const panel = el("div", "errors");
  for (const error of state.errors.slice(-3)) {
    panel.append(el("div", "error", `${error.code}: ${error.message}`));
  }
  return panel;
}
