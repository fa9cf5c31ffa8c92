// Reconnecting websocket client. On every (re)connect it sends JOIN — with
// the stored token after the first WELCOME — so a dropped link resumes the
// same participant and the server answers with a full snapshot.

import { Frame, Kind, buildJoin, encodeFrame, parseFrame } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  url: string;
  gameId: string;
  name: string;
  kind: Kind;
  socketFactory?: SocketFactory;
  storage?: Pick<Storage, "getItem" | "setItem" | "removeItem">;
  reconnectDelaysMs?: number[];
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

const DEFAULT_DELAYS = [500, 1000, 2000, 4000, 8000];

export class GameClient {
  onFrame: ((frame: Frame, clientNowMs: number) => void) | null = null;
  onStatus: ((status: "connecting" | "open" | "closed") => void) | null = null;

  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private readonly options: ClientOptions;

  constructor(options: ClientOptions) {
    this.options = options;
  }

  private get tokenKey(): string {
    return `pg:${this.options.gameId}:token`;
  }

  get token(): string | null {
    return this.options.storage?.getItem(this.tokenKey) ?? null;
  }

  connect(): void {
    this.stopped = false;
    const factory =
      this.options.socketFactory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    this.onStatus?.("connecting");
    const socket = factory(this.options.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.onStatus?.("open");
      const token = this.token ?? undefined;
      this.sendFrame(buildJoin(this.options.gameId, this.options.name, this.options.kind, token));
    };
    socket.onmessage = (event) => {
      let frame: Frame;
      try {
        frame = parseFrame(event.data);
      } catch {
        return;
      }
      if (frame.type === "WELCOME") {
        const token = (frame.payload as any).token;
        if (typeof token === "string" && token) {
          this.options.storage?.setItem(this.tokenKey, token);
        }
      }
      this.onFrame?.(frame, Date.now());
    };
    socket.onclose = () => {
      this.socket = null;
      this.onStatus?.("closed");
      if (!this.stopped) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    const delays = this.options.reconnectDelaysMs ?? DEFAULT_DELAYS;
    const delay = delays[Math.min(this.attempts, delays.length - 1)];
    this.attempts += 1;
    const schedule = this.options.setTimeoutFn ?? setTimeout;
    schedule(() => {
      if (!this.stopped) this.connect();
    }, delay);
  }

  sendFrame(frame: Frame): boolean {
    if (!this.socket) return false;
    this.socket.send(encodeFrame(frame));
    return true;
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
