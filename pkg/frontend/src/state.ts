/**
 * Panel view state and its pure transition functions.
 *
 * Everything here is a plain function from (state, event) to a new state;
 * no sockets, no DOM, no timers. The view is a projection of the daemon's
 * session: rebuilding from a session/state snapshot must produce the same
 * transcript and card set as replaying the notifications one by one
 * (expansion flags excepted, those are local-only and reset collapsed).
 *
 * Invariants kept here:
 *   - at most one current (temporary) group; a publish replaces it
 *   - a group that holds an accepted suggestion is retained and stays
 *     anchored at its position in the transcript
 *   - notifications naming a group other than the current one are ignored
 *     (they are stale echoes of an already-replaced group)
 *   - a transition that fails validation returns the state unchanged
 */

export const SUGGESTION_TYPES = [
  "improvement",
  "explanation",
  "brainstorm",
  "test",
  "bug-fix",
  "syntax-hint",
] as const;

export type SuggestionTag = (typeof SUGGESTION_TYPES)[number];

export const TYPE_LABELS: Record<string, string> = {
  improvement: "code improvements",
  explanation: "code explanations",
  brainstorm: "brainstorming ideas",
  test: "additional testing",
  "bug-fix": "bug fixes",
  "syntax-hint": "syntax hints",
};

export const MODELS = ["gpt-4o", "codestral"] as const;

// ---------------------------------------------------------------------------
// Wire shapes (as the daemon sends them; camelCase, times in ms)

export interface WireSuggestion {
  id: string;
  tag: string;
  description: string;
  displayDescription: string;
  code: string;
  explanation: string;
  state: string; // temporary | accepted | dismissed
  createdAt: number;
}

export interface WireGroup {
  id: string;
  createdAt: number;
  retained: boolean;
  suggestions: WireSuggestion[];
}

export interface WireMessage {
  role: string; // user | assistant
  body: string;
  origin: string; // chat | accepted-suggestion
  at: number;
}

export interface WireCost {
  requests: number;
  unpriced_requests: number;
  input_tokens: number;
  output_tokens: number;
  estimated_any: boolean;
  cost_micro: number;
  cost_usd: string;
}

export interface WireSessionState {
  messages: WireMessage[];
  currentGroup: WireGroup | null;
  currentAnchor: number;
  retainedGroups: { group: WireGroup; anchor: number }[];
  config: { task: string | null; enabledTypes: string[]; model: string };
  counts: Record<string, number>;
  cost: WireCost;
}

// ---------------------------------------------------------------------------
// View state

export interface Card {
  suggestion: WireSuggestion;
  expanded: boolean;
}

export interface GroupView {
  id: string;
  createdAt: number;
  retained: boolean;
  cards: Card[];
}

export interface AnchoredGroup {
  group: GroupView;
  anchor: number; // index into transcript the group sits before
}

export interface SettingsForm {
  task: string;
  enabled: Record<string, boolean>;
  model: string;
  error: string | null; // inline validation message, shown under the form
}

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface PanelViewState {
  status: ConnectionStatus;
  transcript: WireMessage[];
  currentGroup: GroupView | null;
  currentAnchor: number;
  retainedGroups: AnchoredGroup[];
  settings: SettingsForm;
  cost: WireCost | null;
  toasts: string[];
}

export function initialState(): PanelViewState {
  const enabled: Record<string, boolean> = {};
  for (const t of SUGGESTION_TYPES) enabled[t] = true;
  return {
    status: "connecting",
    transcript: [],
    currentGroup: null,
    currentAnchor: 0,
    retainedGroups: [],
    settings: { task: "", enabled, model: "gpt-4o", error: null },
    cost: null,
    toasts: [],
  };
}

function toGroupView(group: WireGroup): GroupView {
  return {
    id: group.id,
    createdAt: group.createdAt,
    retained: group.retained,
    cards: group.suggestions.map((s) => ({ suggestion: s, expanded: false })),
  };
}

function groupIsRetained(g: GroupView): boolean {
  return g.retained || g.cards.some((c) => c.suggestion.state === "accepted");
}

// ---------------------------------------------------------------------------
// Notification transitions

export function applyStatus(
  state: PanelViewState,
  status: ConnectionStatus,
): PanelViewState {
  return { ...state, status };
}

export function applyMessageAppended(
  state: PanelViewState,
  message: WireMessage,
): PanelViewState {
  return { ...state, transcript: [...state.transcript, message] };
}

/**
 * A new group replaces the current one. If the outgoing group was retained
 * (someone accepted from it) it moves into the transcript at its anchor;
 * otherwise it simply disappears, mirroring the daemon's dismissal of
 * temporaries. New cards always start collapsed.
 */
export function applyPublished(
  state: PanelViewState,
  group: WireGroup,
): PanelViewState {
  let retained = state.retainedGroups;
  const old = state.currentGroup;
  if (old && groupIsRetained(old)) {
    retained = [...retained, { group: old, anchor: state.currentAnchor }];
  }
  return {
    ...state,
    currentGroup: toGroupView(group),
    currentAnchor: state.transcript.length,
    retainedGroups: retained,
  };
}

/** Removes the current cards. A mismatched id is a stale echo: ignore it. */
export function applyCleared(
  state: PanelViewState,
  groupId: string,
): PanelViewState {
  const old = state.currentGroup;
  if (!old || old.id !== groupId) return state;
  let retained = state.retainedGroups;
  if (groupIsRetained(old)) {
    retained = [...retained, { group: old, anchor: state.currentAnchor }];
  }
  return { ...state, currentGroup: null, retainedGroups: retained };
}

export function applyCost(
  state: PanelViewState,
  cost: WireCost,
): PanelViewState {
  return { ...state, cost };
}

/**
 * Rebuild the whole view from a session/state snapshot. Local-only bits
 * (settings drafts are overwritten by the authoritative config, expansion
 * resets, toasts survive) follow reconnect semantics: the daemon owns the
 * session, the panel owns ephemera.
 */
export function applySessionState(
  state: PanelViewState,
  wire: WireSessionState,
): PanelViewState {
  const enabled: Record<string, boolean> = {};
  for (const t of SUGGESTION_TYPES) {
    enabled[t] = wire.config.enabledTypes.includes(t);
  }
  return {
    ...state,
    transcript: [...wire.messages],
    currentGroup: wire.currentGroup ? toGroupView(wire.currentGroup) : null,
    currentAnchor: wire.currentAnchor,
    retainedGroups: wire.retainedGroups.map((ag) => ({
      group: toGroupView(ag.group),
      anchor: ag.anchor,
    })),
    settings: {
      task: wire.config.task ?? "",
      enabled,
      model: wire.config.model,
      error: null,
    },
    cost: wire.cost,
  };
}

// ---------------------------------------------------------------------------
// Local interactions

/** Click on a card header toggles code/explanation visibility. */
export function toggleCard(
  state: PanelViewState,
  suggestionId: string,
): PanelViewState {
  const flip = (g: GroupView): GroupView => ({
    ...g,
    cards: g.cards.map((c) =>
      c.suggestion.id === suggestionId ? { ...c, expanded: !c.expanded } : c,
    ),
  });
  const next = { ...state };
  if (state.currentGroup) next.currentGroup = flip(state.currentGroup);
  next.retainedGroups = state.retainedGroups.map((ag) => ({
    ...ag,
    group: flip(ag.group),
  }));
  return next;
}

/**
 * Applies a successful suggestions/accept result: the card flips to
 * accepted and its group becomes retained. The assistant message arrives
 * separately as chat/messageAppended (the daemon sends it first), so this
 * must not touch the transcript. Unknown ids leave the state unchanged.
 */
export function applyAccepted(
  state: PanelViewState,
  suggestionId: string,
): PanelViewState {
  const mark = (g: GroupView): GroupView => {
    if (!g.cards.some((c) => c.suggestion.id === suggestionId)) return g;
    return {
      ...g,
      retained: true,
      cards: g.cards.map((c) =>
        c.suggestion.id === suggestionId
          ? { ...c, suggestion: { ...c.suggestion, state: "accepted" } }
          : c,
      ),
    };
  };
  const next = { ...state };
  if (state.currentGroup) next.currentGroup = mark(state.currentGroup);
  next.retainedGroups = state.retainedGroups.map((ag) => ({
    ...ag,
    group: mark(ag.group),
  }));
  return next;
}

export function pushToast(state: PanelViewState, text: string): PanelViewState {
  return { ...state, toasts: [...state.toasts, text] };
}

export function dismissToast(
  state: PanelViewState,
  index: number,
): PanelViewState {
  return { ...state, toasts: state.toasts.filter((_, i) => i !== index) };
}

// ---------------------------------------------------------------------------
// Settings form

export function setTask(state: PanelViewState, task: string): PanelViewState {
  return { ...state, settings: { ...state.settings, task } };
}

export function setModel(state: PanelViewState, model: string): PanelViewState {
  return { ...state, settings: { ...state.settings, model } };
}

export function toggleType(state: PanelViewState, tag: string): PanelViewState {
  const enabled = { ...state.settings.enabled, [tag]: !state.settings.enabled[tag] };
  return { ...state, settings: { ...state.settings, enabled } };
}

export function setSettingsError(
  state: PanelViewState,
  error: string | null,
): PanelViewState {
  return { ...state, settings: { ...state.settings, error } };
}

export function enabledTags(form: SettingsForm): string[] {
  return SUGGESTION_TYPES.filter((t) => form.enabled[t]);
}

/**
 * Client-side check mirroring the daemon's rule that the enabled set must
 * be non-empty. Returns the inline error to show, or null when the form
 * may be submitted. Toggling everything off must never reach the wire.
 */
export function validateSettings(form: SettingsForm): string | null {
  if (enabledTags(form).length === 0) {
    return "enable at least one suggestion type";
  }
  return null;
}

// ---------------------------------------------------------------------------
// Chat typing throttle

export const TYPING_MIN_GAP_MS = 500;

/** True when enough time passed since the last chat/typing send. */
export function shouldSendTyping(
  lastSentAt: number | null,
  now: number,
  minGapMs: number = TYPING_MIN_GAP_MS,
): boolean {
  return lastSentAt === null || now - lastSentAt >= minGapMs;
}

// ---------------------------------------------------------------------------
// Timeline projection (what the transcript region renders, in order)

export type TimelineEntry =
  | { kind: "message"; message: WireMessage }
  | { kind: "group"; group: GroupView };

/**
 * Interleaves retained groups into the message list by anchor: a group
 * anchored at k appears after message k-1 and before message k, which is
 * where the conversation stood when it was published.
 */
export function timeline(state: PanelViewState): TimelineEntry[] {
  const byAnchor = new Map<number, GroupView[]>();
  for (const ag of state.retainedGroups) {
    const bucket = byAnchor.get(ag.anchor) ?? [];
    bucket.push(ag.group);
    byAnchor.set(ag.anchor, bucket);
  }
  const entries: TimelineEntry[] = [];
  for (let i = 0; i <= state.transcript.length; i++) {
    for (const g of byAnchor.get(i) ?? []) entries.push({ kind: "group", group: g });
    if (i < state.transcript.length) {
      entries.push({ kind: "message", message: state.transcript[i] });
    }
  }
  return entries;
}
