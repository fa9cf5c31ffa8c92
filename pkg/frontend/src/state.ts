// Client view model: a pure fold over the received frame stream. The
// reducer never evaluates game rules; it only mirrors what the server
// broadcast, and the UI renders this state verbatim.

import {
  ArgumentMsg,
  Frame,
  RankingRow,
  RevealedEntry,
  RosterEntry,
  TallyMsg,
  WordRef,
  refKey,
} from "./protocol.js";

export type PhaseName =
  | "CONNECTING"
  | "LOBBY"
  | "SUBMISSION"
  | "REVEAL"
  | "DEBATE"
  | "VOTING"
  | "SCORED"
  | "OVER";

export interface DebateInfo {
  word_ref: WordRef;
  author_id: string;
  challengers: string[];
  word: string;
  category_index: number;
  deadline: number;
  position: number;
  total: number;
}

export interface GameConfigView {
  categories: string[];
  submission_seconds: number;
  debate_seconds: number;
  vote_seconds: number;
  victory_points: number;
  [key: string]: unknown;
}

export interface ViewState {
  gameId: string;
  playerId: string | null;
  token: string | null;
  clockDeltaMs: number; // serverNow - clientNow, measured at WELCOME
  lastSeq: number;
  seqGap: boolean;
  config: GameConfigView | null;
  roster: RosterEntry[];
  phase: PhaseName;
  round: number;
  letter: string;
  deadline: number;
  entries: RevealedEntry[];
  debate: DebateInfo | null;
  voteOpen: boolean;
  transcript: ArgumentMsg[];
  tallies: TallyMsg[];
  board: Record<string, number>;
  ranking: RankingRow[] | null;
  winners: string[];
  errors: { code: string; message: string }[];
}

export function initialState(gameId: string): ViewState {
  return {
    gameId,
    playerId: null,
    token: null,
    clockDeltaMs: 0,
    lastSeq: 0,
    seqGap: false,
    config: null,
    roster: [],
    phase: "CONNECTING",
    round: 0,
    letter: "",
    deadline: 0,
    entries: [],
    debate: null,
    voteOpen: false,
    transcript: [],
    tallies: [],
    board: {},
    ranking: null,
    winners: [],
    errors: [],
  };
}

function restoreSnapshot(state: ViewState, snapshot: any): ViewState {
  const next = { ...state };
  next.board = { ...(snapshot.board ?? {}) };
  if (snapshot.over && snapshot.outcome) {
    next.phase = "OVER";
    next.ranking = snapshot.outcome.ranking ?? [];
    next.winners = snapshot.outcome.winners ?? [];
    return next;
  }
  const round = snapshot.round;
  if (!round) {
    next.phase = snapshot.started ? "SCORED" : "LOBBY";
    return next;
  }
  next.round = round.round;
  next.letter = round.letter;
  next.phase = round.phase as PhaseName;
  next.deadline = round.deadline;
  next.entries = round.entries ?? [];
  next.transcript = round.transcript ?? [];
  if ((round.phase === "DEBATE" || round.phase === "VOTING") && round.current_ref) {
    next.debate = {
      word_ref: round.current_ref,
      author_id: round.current_ref.author_id,
      challengers: round.challengers ?? [],
      word: wordOf(next.entries, round.current_ref),
      category_index: round.current_ref.category_index,
      deadline: round.deadline,
      position: round.position ?? 1,
      total: (round.contested ?? []).length,
    };
    next.voteOpen = round.phase === "VOTING";
  }
  return next;
}

function wordOf(entries: RevealedEntry[], ref: WordRef): string {
  const hit = entries.find((e) => refKey(e.ref) === refKey(ref));
  return hit ? hit.raw : "";
}

export function applyFrame(state: ViewState, frame: Frame, clientNowMs?: number): ViewState {
  const payload = frame.payload as any;
  let next = state;
  if (typeof frame.seq === "number") {
    next = { ...next };
    if (state.lastSeq && frame.seq > state.lastSeq + 1) next.seqGap = true;
    next.lastSeq = Math.max(state.lastSeq, frame.seq);
  }
  switch (frame.type) {
    case "WELCOME": {
      next = { ...next };
      next.playerId = payload.player_id;
      next.token = payload.token ?? next.token;
      next.config = payload.config;
      next.roster = payload.roster ?? [];
      next.lastSeq = payload.last_seq ?? 0;
      next.seqGap = false;
      if (typeof payload.now_ms === "number" && typeof clientNowMs === "number") {
        next.clockDeltaMs = payload.now_ms - clientNowMs;
      }
      next.phase = "LOBBY";
      return restoreSnapshot(next, payload.state ?? {});
    }
    case "ROSTER":
      return { ...next, roster: payload.players ?? [] };
    case "ROUND_START":
      return {
        ...next,
        phase: "SUBMISSION",
        round: payload.round,
        letter: payload.letter,
        deadline: payload.deadline,
        entries: [],
        debate: null,
        voteOpen: false,
        transcript: [],
        tallies: [],
      };
    case "REVEAL":
      return {
        ...next,
        phase: "REVEAL",
        round: payload.round,
        letter: payload.letter ?? next.letter,
        deadline: payload.deadline,
        entries: payload.entries ?? [],
        debate: null,
        voteOpen: false,
      };
    case "DEBATE_OPEN":
      return {
        ...next,
        phase: "DEBATE",
        deadline: payload.deadline,
        voteOpen: false,
        debate: {
          word_ref: payload.word_ref,
          author_id: payload.author_id,
          challengers: payload.challengers ?? [],
          word: payload.word ?? wordOf(next.entries, payload.word_ref),
          category_index: payload.category_index,
          deadline: payload.deadline,
          position: payload.position ?? 1,
          total: payload.total ?? 1,
        },
      };
    case "ARGUMENT":
      return { ...next, transcript: [...next.transcript, payload as ArgumentMsg] };
    case "VOTE_OPEN":
      return { ...next, phase: "VOTING", voteOpen: true, deadline: payload.deadline };
    case "TALLY": {
      const tally = payload as TallyMsg;
      const entries = next.entries.map((entry) =>
        refKey(entry.ref) === refKey(tally.word_ref)
          ? { ...entry, status: tally.outcome }
          : entry,
      );
      return { ...next, voteOpen: false, entries, tallies: [...next.tallies, tally] };
    }
    case "SCORES":
      return { ...next, phase: "SCORED", board: { ...payload.board }, debate: null, voteOpen: false };
    case "GAME_OVER":
      return {
        ...next,
        phase: "OVER",
        ranking: payload.ranking ?? [],
        winners: payload.winners ?? [],
        board: { ...(payload.board ?? next.board) },
        debate: null,
        voteOpen: false,
      };
    case "ERROR":
      return {
        ...next,
        errors: [...next.errors, { code: payload.code, message: payload.message }].slice(-5),
      };
    default:
      return next;
  }
}

// -- phase gating -----------------------------------------------------------
// The UI only mirrors server validation: outside these windows the controls
// are disabled and the action helpers refuse to build frames.

export function canSubmit(state: ViewState): boolean {
  return state.phase === "SUBMISSION";
}

export function canChallenge(state: ViewState, entry: RevealedEntry): boolean {
  return (
    state.phase === "REVEAL" &&
    entry.status === "PENDING" &&
    entry.ref.author_id !== state.playerId
  );
}

export function canArgue(state: ViewState): boolean {
  return state.phase === "DEBATE" && state.debate !== null;
}

export function canVote(state: ViewState): boolean {
  return state.phase === "VOTING" && state.voteOpen && state.debate !== null;
}

export function displayName(state: ViewState, playerId: string): string {
  const entry = state.roster.find((p) => p.id === playerId);
  return entry ? entry.name : playerId;
}

export function isArtificial(state: ViewState, playerId: string): boolean {
  const entry = state.roster.find((p) => p.id === playerId);
  return entry ? entry.kind === "ARTIFICIAL" : false;
}
