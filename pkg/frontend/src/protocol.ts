/**
 * Minimal JSON-RPC 2.0 client over WebSocket.
 *
 * The socket is injected as a factory so the same client runs in the
 * browser (global WebSocket) and under Node tests (the `ws` package,
 * which exposes the same onopen/onmessage/onclose/onerror surface).
 *
 * Correlation: every request gets a fresh integer id; responses settle
 * the matching pending promise. Frames without an id are notifications
 * and go to the notification handler. The daemon may emit notifications
 * before the response that triggered them (e.g. chat/messageAppended
 * before the suggestions/accept result), so handlers must not assume
 * request/notify ordering.
 */

export type ConnectionStatus = "connecting" | "open" | "closed";

// Lowest common denominator of browser WebSocket and the `ws` package.
// Handler params are `any`: these are assignment slots, and the DOM and
// `ws` declare them with their own event classes, which only unify this way.
/* eslint-disable @typescript-eslint/no-explicit-any */
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
}

export type SocketFactory = (url: string) => WebSocketLike;

export class RpcError extends Error {
  code: number;
  data: unknown;

  constructor(code: number, message: string, data?: unknown) {
    super(message);
    this.name = "RpcError";
    this.code = code;
    this.data = data;
  }
}

/** Local (not from the wire) code for a dropped/absent connection. */
export const CONNECTION_CLOSED = -1;

interface Pending {
  resolve: (value: unknown) => void;
  reject: (err: RpcError) => void;
}

export type NotificationHandler = (method: string, params: unknown) => void;
export type StatusHandler = (status: ConnectionStatus) => void;

export class RpcClient {
  private factory: SocketFactory;
  private url: string;
  private onNotification: NotificationHandler;
  private onStatus: StatusHandler;
  private socket: WebSocketLike | null = null;
  private open = false;
  private nextId = 1;
  private pending = new Map<number, Pending>();

  constructor(
    factory: SocketFactory,
    url: string,
    onNotification: NotificationHandler,
    onStatus: StatusHandler,
  ) {
    this.factory = factory;
    this.url = url;
    this.onNotification = onNotification;
    this.onStatus = onStatus;
  }

  get isOpen(): boolean {
    return this.open;
  }

  /** Resolves once the socket opens; rejects if it errors or closes first. */
  connect(): Promise<void> {
    this.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    return new Promise((resolve, reject) => {
      let settled = false;
      socket.onopen = () => {
        settled = true;
        this.open = true;
        this.onStatus("open");
        resolve();
      };
      socket.onmessage = (ev) => this.handleFrame(String(ev.data));
      socket.onerror = () => {
        // onclose follows onerror; cleanup happens there.
        if (!settled) {
          settled = true;
          reject(new RpcError(CONNECTION_CLOSED, "connection failed"));
        }
      };
      socket.onclose = () => {
        const wasOpen = this.open;
        this.open = false;
        this.socket = null;
        this.failAllPending();
        if (!settled) {
          settled = true;
          reject(new RpcError(CONNECTION_CLOSED, "connection closed"));
        } else if (wasOpen) {
          this.onStatus("closed");
        }
      };
    });
  }

  request(method: string, params?: unknown): Promise<unknown> {
    if (!this.open || !this.socket) {
      return Promise.reject(
        new RpcError(CONNECTION_CLOSED, "connection closed"),
      );
    }
    const id = this.nextId++;
    const frame: Record<string, unknown> = { jsonrpc: "2.0", id, method };
    if (params !== undefined) frame.params = params;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      try {
        this.socket!.send(JSON.stringify(frame));
      } catch (err) {
        this.pending.delete(id);
        reject(new RpcError(CONNECTION_CLOSED, "connection closed"));
      }
    });
  }

  /** Fire-and-forget notification; silently dropped when disconnected. */
  notify(method: string, params?: unknown): void {
    if (!this.open || !this.socket) return;
    const frame: Record<string, unknown> = { jsonrpc: "2.0", method };
    if (params !== undefined) frame.params = params;
    try {
      this.socket.send(JSON.stringify(frame));
    } catch {
      // Connection raced shut; typing signals are best-effort.
    }
  }

  close(): void {
    if (this.socket) this.socket.close();
  }

  private handleFrame(raw: string): void {
    let frame: Record<string, unknown>;
    try {
      frame = JSON.parse(raw) as Record<string, unknown>;
    } catch {
      return; // not ours to crash on
    }
    if (typeof frame.method === "string") {
      this.onNotification(frame.method, frame.params);
      return;
    }
    if (typeof frame.id !== "number") return;
    const pending = this.pending.get(frame.id);
    if (!pending) return;
    this.pending.delete(frame.id);
    if (frame.error !== undefined && frame.error !== null) {
      const err = frame.error as { code?: number; message?: string; data?: unknown };
      pending.reject(
        new RpcError(err.code ?? 0, err.message ?? "unknown error", err.data),
      );
    } else {
      pending.resolve(frame.result);
    }
  }

  private failAllPending(): void {
    const waiting = [...this.pending.values()];
    this.pending.clear();
    for (const p of waiting) {
      p.reject(new RpcError(CONNECTION_CLOSED, "connection closed"));
    }
  }
}
