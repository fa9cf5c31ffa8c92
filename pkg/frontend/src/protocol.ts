// Wire protocol: one JSON frame per websocket message.
// Inbound (client -> server): JOIN, SUBMIT_WORDS, CHALLENGE, ARGUMENT, VOTE, LEAVE.
// Outbound (server -> client): WELCOME, ROSTER, ROUND_START, REVEAL, DEBATE_OPEN,
// ARGUMENT, VOTE_OPEN, TALLY, SCORES, GAME_OVER, ERROR.

export type Kind = "HUMAN" | "ARTIFICIAL";

export interface WordRef {
  round: number;
  author_id: string;
  category_index: number;
}

export interface Frame {
  type: string;
  game: string;
  seq?: number | null;
  payload: Record<string, unknown>;
}

export interface RosterEntry {
  id: string;
  name: string;
  kind: Kind;
  connected: boolean;
  submitted?: boolean;
}

export interface RevealedEntry {
  ref: WordRef;
  raw: string;
  normalized: string;
  status: string;
}

export interface ArgumentMsg {
  word_ref: WordRef;
  author_id: string;
  text: string;
  seq: number;
}

export interface TallyMsg {
  word_ref: WordRef;
  approve: number;
  reject: number;
  outcome: "APPROVED" | "REJECTED";
}

export interface RankingRow {
  player_id: string;
  name: string;
  score: number;
}

export function refKey(ref: WordRef): string {
  return `${ref.round}:${ref.author_id}:${ref.category_index}`;
}

export function sameRef(a: WordRef | null, b: WordRef | null): boolean {
  return !!a && !!b && refKey(a) === refKey(b);
}

// -- inbound frame builders (exactly one per inbound type) --------------------

export function buildJoin(game: string, name: string, kind: Kind, token?: string): Frame {
  const payload: Record<string, unknown> = { name, kind };
  if (token) payload.token = token;
  return { type: "JOIN", game, payload };
}

export function buildSubmitWords(
  game: string,
  round: number,
  entries: { category: number; word: string }[],
): Frame {
  return { type: "SUBMIT_WORDS", game, payload: { round, entries } };
}

export function buildChallenge(game: string, ref: WordRef): Frame {
  return {
    type: "CHALLENGE",
    game,
    payload: { round: ref.round, author: ref.author_id, category: ref.category_index },
  };
}

export function buildArgument(game: string, ref: WordRef, text: string): Frame {
  return { type: "ARGUMENT", game, payload: { word_ref: ref, text } };
}

export function buildVote(game: string, ref: WordRef, choice: "APPROVE" | "REJECT"): Frame {
  return { type: "VOTE", game, payload: { word_ref: ref, choice } };
}

export function buildLeave(game: string): Frame {
  return { type: "LEAVE", game, payload: {} };
}

export function parseFrame(text: string): Frame {
  const data = JSON.parse(text) as Record<string, unknown>;
  if (typeof data !== "object" || data === null) throw new Error("frame is not an object");
  if (typeof data.type !== "string") throw new Error("frame missing type");
  const payload = (data.payload ?? {}) as Record<string, unknown>;
  return {
    type: data.type,
    game: typeof data.game === "string" ? data.game : "",
    seq: typeof data.seq === "number" ? data.seq : null,
    payload,
  };
}

export function encodeFrame(frame: Frame): string {
  return JSON.stringify(frame);
}
