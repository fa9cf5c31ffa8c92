// Deadlines arrive as absolute server milliseconds; the client measures its
// clock offset once at WELCOME and derives every countdown from it.

export function clockDelta(serverNowMs: number, clientNowMs: number): number {
  return serverNowMs - clientNowMs;
}

export function remainingMs(deadlineMs: number, deltaMs: number, clientNowMs: number): number {
  const serverNow = clientNowMs + deltaMs;
  return Math.max(0, deadlineMs - serverNow);
}

export function formatCountdown(ms: number): string {
  const totalSeconds = Math.ceil(ms / 1000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${seconds.toString().padStart(2, "0")}`;
}
