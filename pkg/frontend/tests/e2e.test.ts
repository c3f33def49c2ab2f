// End-to-end: spawn the daemon with the deterministic mock provider and
// drive the real panel wiring (createApp) against it over WebSocket.
// Covers the full card lifecycle a user would see: publish, expand,
// accept, anchoring across the next publish, and type narrowing.
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ChildProcess, spawn } from "node:child_process";
import { createServer, AddressInfo } from "node:net";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";

import { App, createApp } from "../src/app.js";
import { SocketFactory, WebSocketLike } from "../src/protocol.js";
import {
  SUGGESTION_TYPES,
  WireSessionState,
  applySessionState,
  initialState,
} from "../src/state.js";
import { ViewHandlers, render } from "../src/view.js";

const repoRoot = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const srv = createServer();
    srv.on("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as AddressInfo).port;
      srv.close(() => resolvePort(port));
    });
  });
}

async function waitFor(
  check: () => boolean,
  what: string,
  timeoutMs = 15000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

async function wsReady(url: string, timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    const ok = await new Promise<boolean>((resolveTry) => {
      const sock = new WebSocket(url);
      sock.onopen = () => {
        sock.close();
        resolveTry(true);
      };
      sock.onerror = () => resolveTry(false);
    });
    if (ok) return;
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("daemon did not accept websocket connections");
}

let daemon: ChildProcess;
let daemonErr = "";
let url: string;
let app: App;
let root: HTMLElement;
// every frame the panel sends, for asserting what did (not) reach the wire
const sentFrames: Record<string, unknown>[] = [];

const socketFactory: SocketFactory = (target) => {
  const sock = new WebSocket(target) as unknown as WebSocketLike & {
    send(data: string): void;
  };
  const rawSend = sock.send.bind(sock);
  sock.send = (data: string) => {
    sentFrames.push(JSON.parse(data) as Record<string, unknown>);
    rawSend(data);
  };
  return sock;
};

beforeAll(async () => {
  const port = await freePort();
  url = `ws://127.0.0.1:${port}`;
  daemon = spawn("python3", ["-m", "genied", "--ws", String(port), "--mock"], {
    cwd: repoRoot,
    env: { ...process.env, PYTHONUNBUFFERED: "1" },
    stdio: ["ignore", "ignore", "pipe"],
  });
  daemon.stderr!.on("data", (chunk: Buffer) => {
    daemonErr += chunk.toString();
  });
  await wsReady(url);

  root = document.createElement("div");
  document.body.appendChild(root);
  app = createApp({ url, root, socketFactory, reconnectDelayMs: null });
  await app.start();
});

afterAll(async () => {
  app?.stop();
  if (daemon && daemon.exitCode === null) {
    daemon.kill("SIGTERM");
    await new Promise((r) => {
      daemon.once("exit", r);
      setTimeout(r, 3000);
    });
  }
});

describe("panel against a live daemon", () => {
  it("connects and starts with an empty session", () => {
    expect(app.state.status).toBe("open");
    expect(app.state.transcript).toEqual([]);
    expect(app.state.currentGroup).toBeNull();
    expect(daemonErr).not.toContain("Traceback");
  });

  it("shows three collapsed, tagged cards in their own region after a trigger", async () => {
    app.handlers.onEditorInput("def scale(xs, k):\n    return [x * k for x in xs]\n", 20);
    app.handlers.onTrigger();
    await waitFor(() => app.state.currentGroup !== null, "first publish");

    const cards = root.querySelectorAll(".suggestion-region .card");
    expect(cards.length).toBe(3);
    for (const card of cards) {
      expect(card.classList.contains("collapsed")).toBe(true);
      const chip = card.querySelector(".tag-chip");
      expect(chip).not.toBeNull();
      expect(SUGGESTION_TYPES).toContain(chip!.textContent);
      expect(card.querySelector(".card-desc")!.textContent).not.toBe("");
    }
    // collapsed means the body is absent, not hidden
    expect(root.querySelector(".suggestion-region .card-body")).toBeNull();
    expect(root.querySelector(".card-code")).toBeNull();
    // suggestions never render inside the chat transcript
    expect(root.querySelector(".transcript .card")).toBeNull();
    // the daemon priced the request and the panel heard about it
    expect(app.state.cost).not.toBeNull();
    expect(app.state.cost!.requests).toBeGreaterThanOrEqual(1);
  });

  it("expands code and explanation on click, collapses on the next", () => {
    const header = root.querySelector(
      ".suggestion-region .card .card-header",
    ) as HTMLElement;
    header.click();

    const expanded = root.querySelector(".suggestion-region .card.expanded")!;
    expect(expanded).not.toBeNull();
    const code = expanded.querySelector(".card-code")!;
    expect(code.textContent).toContain("example");
    expect(expanded.querySelector(".card-explanation")!.textContent).toContain(
      "explanation",
    );

    (root.querySelector(".suggestion-region .card .card-header") as HTMLElement).click();
    expect(root.querySelector(".suggestion-region .card.expanded")).toBeNull();
    expect(root.querySelector(".card-code")).toBeNull();
  });

  it("accept marks the card, retains the group, and appends an assistant message", async () => {
    const group = app.state.currentGroup!;
    const id = group.cards[0].suggestion.id;
    app.handlers.onAccept(id);
    await waitFor(
      () =>
        app.state.transcript.length === 1 &&
        app.state.currentGroup!.cards[0].suggestion.state === "accepted",
      "accept result and chat message",
    );

    const message = app.state.transcript[0];
    expect(message.role).toBe("assistant");
    expect(message.origin).toBe("accepted-suggestion");
    expect(app.state.currentGroup!.retained).toBe(true);

    const node = root.querySelector(".transcript .message");
    expect(node!.classList.contains("origin-accepted-suggestion")).toBe(true);
    expect(
      root.querySelector(".suggestion-region .card.state-accepted"),
    ).not.toBeNull();
  });

  it("keeps the accepted group anchored in the transcript across the next publish", async () => {
    const acceptedId = app.state.currentGroup!.id;
    app.handlers.onEditorInput(
      "def scale(xs, k):\n    return [x * k for x in xs]\n\nprint(scale([1], 2))\n",
      55,
    );
    app.handlers.onTrigger();
    await waitFor(
      () => app.state.currentGroup!.id !== acceptedId,
      "replacement publish",
    );

    // new temporary group lives in the suggestion region
    const current = root.querySelector(".suggestion-region .group.current")!;
    expect(current.getAttribute("data-group-id")).toBe(app.state.currentGroup!.id);
    expect(current.querySelectorAll(".card").length).toBe(3);

    // the accepted one moved into the transcript at its anchor, which was
    // before the message its acceptance generated
    const children = [...root.querySelector(".transcript")!.children];
    const kinds = children.map((c) =>
      c.classList.contains("group")
        ? `group:${c.getAttribute("data-group-id")}`
        : "message",
    );
    expect(kinds).toEqual([`group:${acceptedId}`, "message"]);
    const retained = children[0];
    expect(retained.classList.contains("retained")).toBe(true);
    expect(retained.querySelector(".card.state-accepted")).not.toBeNull();
  });

  it("narrowing enabled types restricts the tags of later cards", async () => {
    for (const tag of SUGGESTION_TYPES) {
      if (tag !== "bug-fix" && tag !== "improvement") {
        app.handlers.onTypeToggle(tag);
      }
    }
    app.handlers.onSettingsSubmit();
    await waitFor(
      () =>
        sentFrames.some(
          (f) =>
            f.method === "config/update" &&
            (f.params as { enabledTypes: string[] }).enabledTypes.length === 2,
        ),
      "config/update on the wire",
    );

    const previous = app.state.currentGroup!.id;
    app.handlers.onEditorInput("import os\n\nfor p in os.listdir('.'):\n    print(p)\n", 10);
    app.handlers.onTrigger();
    await waitFor(() => app.state.currentGroup!.id !== previous, "narrowed publish");

    const tags = [...root.querySelectorAll(".suggestion-region .tag-chip")].map(
      (chip) => chip.textContent,
    );
    expect(tags.length).toBe(3);
    for (const tag of tags) {
      expect(["bug-fix", "improvement"]).toContain(tag);
    }
    // with exactly two types enabled the daemon still fills three slots
    expect(new Set(tags).size).toBe(2);
  });

  it("blocks an all-off type set locally: inline error, nothing on the wire", () => {
    const before = sentFrames.filter((f) => f.method === "config/update").length;
    app.handlers.onTypeToggle("bug-fix");
    app.handlers.onTypeToggle("improvement");
    app.handlers.onSettingsSubmit();

    expect(app.state.settings.error).toMatch(/at least one/);
    const errorNode = root.querySelector(".settings-error")!;
    expect(errorNode.hasAttribute("hidden")).toBe(false);
    expect(errorNode.textContent).toMatch(/at least one/);
    const after = sentFrames.filter((f) => f.method === "config/update").length;
    expect(after).toBe(before);
  });

  it("the view rebuilt from session/state matches the notification-evolved view", async () => {
    // the daemon owns the session; a re-fetch must reproduce what the
    // panel assembled incrementally from notifications
    const wire = (await app.client.request("session/state")) as WireSessionState;
    const rebuilt = applySessionState(initialState(), wire);

    const facts = (s: typeof app.state) => ({
      transcript: s.transcript.map((m) => [m.role, m.origin, m.body]),
      current: s.currentGroup
        ? s.currentGroup.cards.map((c) => [c.suggestion.id, c.suggestion.state])
        : null,
      retained: s.retainedGroups.map((ag) => [
        ag.group.id,
        ag.anchor,
        ...ag.group.cards.map((c) => `${c.suggestion.id}:${c.suggestion.state}`),
      ]),
    });
    expect(facts(rebuilt)).toEqual(facts(app.state));

    // and rendering the rebuilt state yields the same regions
    const noop: ViewHandlers = {
      onToggleCard() {}, onAccept() {}, onDismiss() {}, onTrigger() {},
      onSendChat() {}, onChatTyping() {}, onEditorInput() {}, onCursorMove() {},
      onTaskInput() {}, onModelChange() {}, onTypeToggle() {},
      onSettingsSubmit() {}, onToastDismiss() {},
    };
    const root2 = document.createElement("div");
    render(root2, rebuilt, noop);
    expect(
      root2.querySelectorAll(".suggestion-region .card").length,
    ).toBe(root.querySelectorAll(".suggestion-region .card").length);
    expect(
      [...root2.querySelector(".transcript")!.children].map((c) => c.className),
    ).toEqual([...root.querySelector(".transcript")!.children].map((c) => c.className));
  });
});
