/**
 * Wires protocol, state, and view together. The browser entry point
 * (main.ts) calls createApp with the global WebSocket; tests call it with
 * the `ws` package and a happy-dom root, so the wiring under test is the
 * wiring that ships.
 */

import {
  RpcClient,
  RpcError,
  SocketFactory,
  CONNECTION_CLOSED,
} from "./protocol.js";
import {
  PanelViewState,
  WireCost,
  WireGroup,
  WireMessage,
  WireSessionState,
  applyAccepted,
  applyCleared,
  applyCost,
  applyMessageAppended,
  applyPublished,
  applySessionState,
  applyStatus,
  dismissToast,
  enabledTags,
  initialState,
  pushToast,
  setModel,
  setSettingsError,
  setTask,
  shouldSendTyping,
  toggleCard,
  toggleType,
  validateSettings,
} from "./state.js";
import { ViewHandlers, render } from "./view.js";

export const DOC_URI = "file:///panel/scratch";

export interface AppOptions {
  url: string;
  root: HTMLElement;
  socketFactory: SocketFactory;
  /** Clock for the typing throttle; defaults to Date.now. */
  now?: () => number;
  /** Reconnect delay after a drop; null disables auto-reconnect. */
  reconnectDelayMs?: number | null;
}

export interface App {
  /** Opens the socket, initializes, mirrors the editor, pulls state. */
  start(): Promise<void>;
  stop(): void;
  readonly state: PanelViewState;
  readonly client: RpcClient;
  readonly handlers: ViewHandlers;
}

/** Minimal single-edit diff: common prefix/suffix, replace the middle. */
export function diffEdit(
  before: string,
  after: string,
): { start: number; end: number; text: string } | null {
  if (before === after) return null;
  let prefix = 0;
  const max = Math.min(before.length, after.length);
  while (prefix < max && before[prefix] === after[prefix]) prefix++;
  let suffix = 0;
  while (
    suffix < max - prefix &&
    before[before.length - 1 - suffix] === after[after.length - 1 - suffix]
  ) {
    suffix++;
  }
  return {
    start: prefix,
    end: before.length - suffix,
    text: after.slice(prefix, after.length - suffix),
  };
}

export function createApp(options: AppOptions): App {
  const now = options.now ?? (() => Date.now());
  const reconnectDelay = options.reconnectDelayMs === undefined ? 1000 : options.reconnectDelayMs;

  let state = initialState();
  let stopped = false;
  let editorText = "";
  let editorCursor = 0;
  let cursorKnown = false;
  let lastTypingAt: number | null = null;

  const update = (fn: (s: PanelViewState) => PanelViewState) => {
    state = fn(state);
    render(options.root, state, handlers);
  };

  const toastError = (err: unknown) => {
    const message =
      err instanceof RpcError && err.code === CONNECTION_CLOSED
        ? "connection lost; change not applied"
        : err instanceof Error
          ? err.message
          : String(err);
    update((s) => pushToast(s, message));
  };

  const onNotification = (method: string, params: unknown) => {
    const p = params as Record<string, unknown> | undefined;
    switch (method) {
      case "suggestions/published":
        update((s) => applyPublished(s, p!.group as WireGroup));
        break;
      case "suggestions/cleared":
        update((s) => applyCleared(s, p!.groupId as string));
        break;
      case "chat/messageAppended":
        update((s) => applyMessageAppended(s, p!.message as WireMessage));
        break;
      case "cost/updated":
        update((s) => applyCost(s, p as unknown as WireCost));
        break;
      default:
        break; // forward-compatible: unknown notifications are ignored
    }
  };

  const onStatus = (status: "connecting" | "open" | "closed") => {
    update((s) => applyStatus(s, status));
    if (status === "closed" && !stopped) {
      update((s) => pushToast(s, "connection lost"));
      if (reconnectDelay !== null) {
        setTimeout(() => {
          if (!stopped) void start();
        }, reconnectDelay);
      }
    }
  };

  const client = new RpcClient(
    options.socketFactory,
    options.url,
    onNotification,
    onStatus,
  );

  const refetch = async () => {
    const wire = (await client.request("session/state")) as WireSessionState;
    update((s) => applySessionState(s, wire));
  };

  const start = async () => {
    await client.connect();
    await client.request("initialize", { clientName: "genied-panel" });
    await client.request("document/didOpen", {
      uri: DOC_URI,
      text: editorText,
      version: 0,
    });
    if (cursorKnown) {
      await client.request("cursor/didMove", { uri: DOC_URI, offset: editorCursor });
    }
    await refetch();
  };

  const handlers: ViewHandlers = {
    onToggleCard(suggestionId) {
      update((s) => toggleCard(s, suggestionId));
    },

    onAccept(suggestionId) {
      client
        .request("suggestions/accept", { suggestionId })
        .then((result) => {
          const id = (result as { suggestionId: string }).suggestionId;
          update((s) => applyAccepted(s, id));
        })
        .catch(toastError); // no local change on failure
    },

    onDismiss() {
      // Removal happens on the suggestions/cleared notification.
      client.request("suggestions/dismiss").catch(toastError);
    },

    onTrigger() {
      client
        .request("suggestions/trigger")
        .then((result) => {
          if (!(result as { fired: boolean }).fired) {
            update((s) => pushToast(s, "request already in flight"));
          }
        })
        .catch(toastError);
    },

    onSendChat(body) {
      client.request("chat/sendMessage", { body }).catch(toastError);
    },

    onChatTyping() {
      const t = now();
      if (shouldSendTyping(lastTypingAt, t)) {
        client.notify("chat/typing");
        lastTypingAt = t;
      }
    },

    onEditorInput(text, cursor) {
      const edit = diffEdit(editorText, text);
      editorText = text;
      editorCursor = cursor;
      cursorKnown = true;
      if (edit) {
        client
          .request("document/didChange", { uri: DOC_URI, ...edit })
          .catch(toastError);
      }
    },

    onCursorMove(cursor) {
      if (cursorKnown && cursor === editorCursor) return;
      editorCursor = cursor;
      cursorKnown = true;
      client
        .request("cursor/didMove", { uri: DOC_URI, offset: cursor })
        .catch(toastError);
    },

    onTaskInput(task) {
      update((s) => setTask(s, task));
    },

    onModelChange(model) {
      update((s) => setModel(s, model));
    },

    onTypeToggle(tag) {
      update((s) => toggleType(s, tag));
    },

    onSettingsSubmit() {
      const error = validateSettings(state.settings);
      if (error) {
        // Invalid form never reaches the wire.
        update((s) => setSettingsError(s, error));
        return;
      }
      const params = {
        task: state.settings.task,
        enabledTypes: enabledTags(state.settings),
        model: state.settings.model,
      };
      client
        .request("config/update", params)
        .then(() => update((s) => setSettingsError(s, null)))
        .catch((err) => {
          if (err instanceof RpcError && err.code === -32021) {
            update((s) => setSettingsError(s, err.message));
          } else {
            toastError(err);
          }
        });
    },

    onToastDismiss(index) {
      update((s) => dismissToast(s, index));
    },
  };

  // First paint before the socket opens.
  render(options.root, state, handlers);

  return {
    start,
    stop() {
      stopped = true;
      client.close();
    },
    get state() {
      return state;
    },
    client,
    handlers,
  };
}
