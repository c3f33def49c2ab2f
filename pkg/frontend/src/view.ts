/**
 * DOM projection of PanelViewState. One render() call rebuilds the panel;
 * callers re-render after every state change. Rebuilding wholesale keeps
 * view code free of incremental-update bugs at panel-sized DOM counts.
 *
 * Layout contract (tests rely on these classes):
 *   .transcript        chat region: messages and retained groups, in order
 *   .suggestion-region separate region for the current (temporary) group,
 *                      never mixed into the chat flow
 *   .card              one suggestion; .collapsed has no .card-body at all,
 *                      .expanded shows .card-code / .card-explanation
 */

import {
  Card,
  GroupView,
  PanelViewState,
  SUGGESTION_TYPES,
  TYPE_LABELS,
  MODELS,
  timeline,
} from "./state.js";

export interface ViewHandlers {
  onToggleCard(suggestionId: string): void;
  onAccept(suggestionId: string): void;
  onDismiss(groupId: string): void;
  onTrigger(): void;
  onSendChat(body: string): void;
  onChatTyping(): void;
  onEditorInput(text: string, cursor: number): void;
  onCursorMove(cursor: number): void;
  onTaskInput(task: string): void;
  onModelChange(model: string): void;
  onTypeToggle(tag: string): void;
  onSettingsSubmit(): void;
  onToastDismiss(index: number): void;
}

function el(
  doc: Document,
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCard(
  doc: Document,
  card: Card,
  handlers: ViewHandlers,
): HTMLElement {
  const s = card.suggestion;
  const classes = [
    "card",
    card.expanded ? "expanded" : "collapsed",
    `state-${s.state}`,
  ];
  const root = el(doc, "article", classes.join(" "));
  root.setAttribute("data-suggestion-id", s.id);

  const header = el(doc, "button", "card-header");
  header.setAttribute("type", "button");
  header.appendChild(el(doc, "span", "tag-chip", s.tag));
  header.appendChild(el(doc, "span", "card-desc", s.displayDescription));
  if (s.state !== "temporary") {
    header.appendChild(el(doc, "span", "card-state", s.state));
  }
  header.addEventListener("click", () => handlers.onToggleCard(s.id));
  root.appendChild(header);

  if (card.expanded) {
    const body = el(doc, "div", "card-body");
    if (s.code) {
      const pre = el(doc, "pre", "card-code");
      pre.textContent = s.code;
      body.appendChild(pre);
    }
    if (s.explanation) {
      body.appendChild(el(doc, "p", "card-explanation", s.explanation));
    }
    if (s.state === "temporary") {
      const accept = el(doc, "button", "accept-btn", "Accept");
      accept.setAttribute("type", "button");
      accept.addEventListener("click", () => handlers.onAccept(s.id));
      body.appendChild(accept);
    }
    root.appendChild(body);
  }
  return root;
}

function renderGroup(
  doc: Document,
  group: GroupView,
  current: boolean,
  handlers: ViewHandlers,
): HTMLElement {
  const root = el(doc, "div", current ? "group current" : "group retained");
  root.setAttribute("data-group-id", group.id);
  for (const card of group.cards) {
    root.appendChild(renderCard(doc, card, handlers));
  }
  if (current) {
    const dismiss = el(doc, "button", "dismiss-btn", "Dismiss");
    dismiss.setAttribute("type", "button");
    dismiss.addEventListener("click", () => handlers.onDismiss(group.id));
    root.appendChild(dismiss);
  }
  return root;
}

export function render(
  root: HTMLElement,
  state: PanelViewState,
  handlers: ViewHandlers,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  // -- header: connection status, running cost, manual trigger
  const header = el(doc, "header", "panel-header");
  header.appendChild(el(doc, "span", `status status-${state.status}`, state.status));
  const costText = state.cost
    ? `$${state.cost.cost_usd} (${state.cost.requests} requests)`
    : "$0.0000 (0 requests)";
  header.appendChild(el(doc, "span", "cost", costText));
  const trigger = el(doc, "button", "trigger-btn", "Suggest now");
  trigger.setAttribute("type", "button");
  trigger.addEventListener("click", () => handlers.onTrigger());
  header.appendChild(trigger);
  root.appendChild(header);

  // -- toasts (transient errors)
  const toasts = el(doc, "div", "toasts");
  state.toasts.forEach((text, i) => {
    const toast = el(doc, "div", "toast");
    toast.appendChild(el(doc, "span", "toast-text", text));
    const close = el(doc, "button", "toast-close", "x");
    close.setAttribute("type", "button");
    close.addEventListener("click", () => handlers.onToastDismiss(i));
    toast.appendChild(close);
    toasts.appendChild(toast);
  });
  root.appendChild(toasts);

  const main = el(doc, "div", "panel-main");

  // -- left column: editor mirror and chat
  const left = el(doc, "div", "panel-left");

  const editor = doc.createElement("textarea");
  editor.className = "editor-area";
  editor.setAttribute("placeholder", "Scratch buffer (mirrored to the daemon)");
  editor.addEventListener("input", () => {
    handlers.onEditorInput(editor.value, editor.selectionStart ?? editor.value.length);
  });
  const reportCursor = () => handlers.onCursorMove(editor.selectionStart ?? 0);
  editor.addEventListener("keyup", reportCursor);
  editor.addEventListener("click", reportCursor);
  left.appendChild(editor);

  const transcript = el(doc, "div", "transcript");
  for (const entry of timeline(state)) {
    if (entry.kind === "message") {
      const m = entry.message;
      const classes = ["message", `role-${m.role}`];
      if (m.origin === "accepted-suggestion") classes.push("origin-accepted-suggestion");
      const node = el(doc, "div", classes.join(" "));
      node.appendChild(el(doc, "span", "message-role", m.role));
      node.appendChild(el(doc, "div", "message-body", m.body));
      transcript.appendChild(node);
    } else {
      transcript.appendChild(renderGroup(doc, entry.group, false, handlers));
    }
  }
  left.appendChild(transcript);

  const chatRow = el(doc, "div", "chat-row");
  const chatInput = doc.createElement("input");
  chatInput.className = "chat-input";
  chatInput.setAttribute("placeholder", "Message the assistant");
  chatInput.addEventListener("input", () => handlers.onChatTyping());
  chatInput.addEventListener("keydown", (ev: KeyboardEvent) => {
    if (ev.key === "Enter" && chatInput.value.trim()) {
      handlers.onSendChat(chatInput.value.trim());
      chatInput.value = "";
    }
  });
  const send = el(doc, "button", "send-btn", "Send");
  send.setAttribute("type", "button");
  send.addEventListener("click", () => {
    if (chatInput.value.trim()) {
      handlers.onSendChat(chatInput.value.trim());
      chatInput.value = "";
    }
  });
  chatRow.appendChild(chatInput);
  chatRow.appendChild(send);
  left.appendChild(chatRow);
  main.appendChild(left);

  // -- right column: current suggestions (own region) and settings
  const right = el(doc, "div", "panel-right");

  const region = el(doc, "section", "suggestion-region");
  region.appendChild(el(doc, "h2", "region-title", "Suggestions"));
  if (state.currentGroup) {
    region.appendChild(renderGroup(doc, state.currentGroup, true, handlers));
  } else {
    region.appendChild(el(doc, "p", "region-empty", "No suggestions yet."));
  }
  right.appendChild(region);

  const settings = el(doc, "form", "settings");
  settings.addEventListener("submit", (ev: Event) => {
    ev.preventDefault();
    handlers.onSettingsSubmit();
  });
  settings.appendChild(el(doc, "h2", "region-title", "Settings"));

  const task = doc.createElement("textarea");
  task.className = "task-input";
  task.setAttribute("placeholder", "What are you working on?");
  task.value = state.settings.task;
  task.addEventListener("input", () => handlers.onTaskInput(task.value));
  settings.appendChild(task);

  const toggles = el(doc, "div", "type-toggles");
  for (const tag of SUGGESTION_TYPES) {
    const label = el(doc, "label", "type-toggle");
    label.setAttribute("data-tag", tag);
    const box = doc.createElement("input");
    box.setAttribute("type", "checkbox");
    box.checked = !!state.settings.enabled[tag];
    box.addEventListener("change", () => handlers.onTypeToggle(tag));
    label.appendChild(box);
    label.appendChild(el(doc, "span", "type-label", TYPE_LABELS[tag] ?? tag));
    toggles.appendChild(label);
  }
  settings.appendChild(toggles);

  const model = doc.createElement("select");
  model.className = "model-select";
  for (const name of MODELS) {
    const opt = doc.createElement("option");
    opt.value = name;
    opt.textContent = name;
    if (name === state.settings.model) opt.setAttribute("selected", "selected");
    model.appendChild(opt);
  }
  model.value = state.settings.model;
  model.addEventListener("change", () => handlers.onModelChange(model.value));
  settings.appendChild(model);

  const apply = el(doc, "button", "apply-btn", "Apply");
  apply.setAttribute("type", "submit");
  settings.appendChild(apply);

  const error = el(doc, "div", "settings-error", state.settings.error ?? "");
  if (!state.settings.error) error.setAttribute("hidden", "hidden");
  settings.appendChild(error);

  right.appendChild(settings);
  main.appendChild(right);
  root.appendChild(main);
}
