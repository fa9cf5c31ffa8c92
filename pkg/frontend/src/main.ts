// Bootstrap: landing form -> websocket client -> render loop.

import { buildArgument, buildChallenge, buildSubmitWords, buildVote, WordRef } from "./protocol.js";
import { GameClient } from "./socket.js";
import {
  ViewState,
  applyFrame,
  canArgue,
  canSubmit,
  canVote,
  initialState,
} from "./state.js";
import { Drafts, Handlers, renderBanner, renderErrors, renderMain, renderRoster, renderScoreboard } from "./ui.js";

const app = document.querySelector<HTMLDivElement>("#app");
if (!app) throw new Error("#app missing");

function defaultServerUrl(): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws`;
}

function landing(onJoin: (opts: { url: string; game: string; name: string }) => void): void {
  app!.innerHTML = "";
  const form = document.createElement("div");
  form.className = "landing";
  form.innerHTML = `
    <h1>participation game</h1>
    <p>a categories word game played with disclosed artificial participants</p>
    <label>your name <input id="f-name" type="text" maxlength="32"></label>
    <label>game id <input id="f-game" type="text" value="table-1" maxlength="32"></label>
    <label>server <input id="f-url" type="text"></label>
    <button id="f-join" class="primary">join as human</button>
  `;
  app!.append(form);
  const urlInput = form.querySelector<HTMLInputElement>("#f-url")!;
  urlInput.value = defaultServerUrl();
  const params = new URLSearchParams(location.search);
  const nameInput = form.querySelector<HTMLInputElement>("#f-name")!;
  const gameInput = form.querySelector<HTMLInputElement>("#f-game")!;
  if (params.get("name")) nameInput.value = params.get("name")!;
  if (params.get("game")) gameInput.value = params.get("game")!;
  form.querySelector<HTMLButtonElement>("#f-join")!.addEventListener("click", () => {
    const name = nameInput.value.trim();
    const game = gameInput.value.trim();
    if (!name || !game) return;
    onJoin({ url: urlInput.value.trim(), game, name });
  });
}

function start(options: { url: string; game: string; name: string }): void {
  let state: ViewState = initialState(options.game);
  const drafts: Drafts = { words: new Map(), argument: "" };
  let lastPanelKey = "";

  const client = new GameClient({
    url: options.url,
    gameId: options.game,
    name: options.name,
    kind: "HUMAN",
    storage: localStorage,
  });

  const handlers: Handlers = {
    submitWords(entries) {
      if (!canSubmit(state)) return;
      client.sendFrame(buildSubmitWords(options.game, state.round, entries));
    },
    challenge(ref: WordRef) {
      if (state.phase !== "REVEAL") return;
      client.sendFrame(buildChallenge(options.game, ref));
    },
    argue(text: string) {
      if (!canArgue(state) || !state.debate) return;
      client.sendFrame(buildArgument(options.game, state.debate.word_ref, text));
      drafts.argument = "";
      render(true);
    },
    vote(choice) {
      if (!canVote(state) || !state.debate) return;
      client.sendFrame(buildVote(options.game, state.debate.word_ref, choice));
    },
  };

  const shell = document.createElement("div");
  shell.className = "shell";
  const header = document.createElement("div");
  header.className = "header";
  const side = document.createElement("div");
  side.className = "side";
  const mainPanel = document.createElement("div");
  mainPanel.className = "main";
  const footer = document.createElement("div");
  footer.className = "footer";
  shell.append(header, side, mainPanel, footer);
  app!.innerHTML = "";
  app!.append(shell);

  function panelKey(): string {
    const debateKey = state.debate
      ? `${state.debate.word_ref.author_id}:${state.debate.word_ref.category_index}`
      : "";
    return [state.phase, state.round, debateKey, state.transcript.length, state.entries.length].join("|");
  }

  function render(forceMain = false): void {
    const now = Date.now();
    header.innerHTML = "";
    header.append(renderBanner(state, now));
    side.innerHTML = "";
    side.append(renderRoster(state), renderScoreboard(state));
    footer.innerHTML = "";
    footer.append(renderErrors(state));
    const key = panelKey();
    if (forceMain || key !== lastPanelKey) {
      lastPanelKey = key;
      mainPanel.innerHTML = "";
      mainPanel.append(renderMain(state, drafts, handlers));
    }
  }

  client.onFrame = (frame, clientNow) => {
    const previousRound = state.round;
    state = applyFrame(state, frame, clientNow);
    if (state.round !== previousRound) {
      drafts.words.clear();
      drafts.argument = "";
    }
    if (state.seqGap) {
      // A missed broadcast means the view may be stale; a fresh JOIN with
      // the stored token returns a full snapshot.
      state = { ...state, seqGap: false };
      client.close();
      client.connect();
    }
    render();
  };
  client.onStatus = (status) => {
    if (status !== "open") {
      header.innerHTML = "";
      const banner = document.createElement("div");
      banner.className = "banner";
      banner.textContent = status === "connecting" ? "connecting…" : "connection lost; retrying…";
      header.append(banner);
    }
  };

  window.setInterval(() => {
    header.innerHTML = "";
    header.append(renderBanner(state, Date.now()));
  }, 500);

  client.connect();
}

landing(start);
