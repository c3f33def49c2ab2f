import { describe, expect, it } from "vitest";

import {
  CONNECTION_CLOSED,
  RpcClient,
  RpcError,
  WebSocketLike,
} from "../src/protocol.js";

class FakeSocket implements WebSocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    if (this.closed) throw new Error("socket closed");
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  // test helpers
  open(): void {
    this.onopen?.();
  }

  deliver(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }

  lastFrame(): Record<string, unknown> {
    return JSON.parse(this.sent[this.sent.length - 1]);
  }
}

function connected() {
  const socket = new FakeSocket();
  const notifications: { method: string; params: unknown }[] = [];
  const statuses: string[] = [];
  const client = new RpcClient(
    () => socket,
    "ws://test",
    (method, params) => notifications.push({ method, params }),
    (s) => statuses.push(s),
  );
  const ready = client.connect();
  socket.open();
  return { socket, client, notifications, statuses, ready };
}

describe("request/response correlation", () => {
  it("resolves each request with its own response, even out of order", async () => {
    const { socket, client, ready } = connected();
    await ready;
    const a = client.request("session/state");
    const b = client.request("suggestions/trigger", {});
    const ida = JSON.parse(socket.sent[0]).id as number;
    const idb = JSON.parse(socket.sent[1]).id as number;
    expect(ida).not.toBe(idb);
    socket.deliver({ jsonrpc: "2.0", id: idb, result: { fired: true } });
    socket.deliver({ jsonrpc: "2.0", id: ida, result: { messages: [] } });
    expect(await b).toEqual({ fired: true });
    expect(await a).toEqual({ messages: [] });
  });

  it("sends jsonrpc 2.0 frames with params only when given", async () => {
    const { socket, client, ready } = connected();
    await ready;
    void client.request("session/state");
    expect(socket.lastFrame()).toEqual({
      jsonrpc: "2.0",
      id: 1,
      method: "session/state",
    });
    client.notify("chat/typing");
    expect(socket.lastFrame()).toEqual({ jsonrpc: "2.0", method: "chat/typing" });
    void client.request("chat/sendMessage", { body: "hi" });
    expect(socket.lastFrame()).toEqual({
      jsonrpc: "2.0",
      id: 2,
      method: "chat/sendMessage",
      params: { body: "hi" },
    });
  });

  it("rejects with an RpcError carrying the wire code", async () => {
    const { socket, client, ready } = connected();
    await ready;
    const p = client.request("suggestions/accept", { suggestionId: "g-1.9" });
    socket.deliver({
      jsonrpc: "2.0",
      id: 1,
      error: { code: -32040, message: "unknown suggestion" },
    });
    const err = (await p.catch((e) => e)) as RpcError;
    expect(err).toBeInstanceOf(RpcError);
    expect(err.code).toBe(-32040);
    expect(err.message).toBe("unknown suggestion");
  });
});

describe("notifications", () => {
  it("routes frames without ids to the notification handler", async () => {
    const { socket, notifications, ready } = connected();
    await ready;
    socket.deliver({
      jsonrpc: "2.0",
      method: "cost/updated",
      params: { requests: 1 },
    });
    expect(notifications).toEqual([
      { method: "cost/updated", params: { requests: 1 } },
    ]);
  });

  it("delivers a notification that precedes its triggering response first", async () => {
    const { socket, client, notifications, ready } = connected();
    await ready;
    const order: string[] = [];
    const p = client
      .request("suggestions/accept", { suggestionId: "g-1.1" })
      .then(() => order.push("response"));
    socket.deliver({
      jsonrpc: "2.0",
      method: "chat/messageAppended",
      params: { message: { role: "assistant" } },
    });
    order.push(`notify:${notifications.length}`);
    socket.deliver({
      jsonrpc: "2.0",
      id: 1,
      result: { suggestionId: "g-1.1", state: "accepted" },
    });
    await p;
    expect(order).toEqual(["notify:1", "response"]);
  });
});

describe("connection loss", () => {
  it("rejects all pending requests when the socket closes", async () => {
    const { socket, client, statuses, ready } = connected();
    await ready;
    const p = client.request("session/state");
    socket.close();
    const err = (await p.catch((e) => e)) as RpcError;
    expect(err.code).toBe(CONNECTION_CLOSED);
    expect(statuses).toEqual(["connecting", "open", "closed"]);
  });

  it("rejects new requests immediately while disconnected", async () => {
    const { socket, client, ready } = connected();
    await ready;
    socket.close();
    const err = (await client.request("suggestions/accept").catch((e) => e)) as RpcError;
    expect(err.code).toBe(CONNECTION_CLOSED);
    expect(socket.sent).toEqual([]); // nothing reached the wire
  });

  it("drops notify silently while disconnected", async () => {
    const { socket, client, ready } = connected();
    await ready;
    socket.close();
    expect(() => client.notify("chat/typing")).not.toThrow();
    expect(socket.sent).toEqual([]);
  });

  it("rejects connect when the socket errors before opening", async () => {
    const socket = new FakeSocket();
    const client = new RpcClient(
      () => socket,
      "ws://test",
      () => {},
      () => {},
    );
    const ready = client.connect();
    socket.onerror?.();
    socket.onclose?.();
    const err = (await ready.catch((e) => e)) as RpcError;
    expect(err.code).toBe(CONNECTION_CLOSED);
  });
});
