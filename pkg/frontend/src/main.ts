/**
 * Browser entry point. Connects to the daemon's WebSocket endpoint
 * (?ws=<url> overrides the default) and mounts the panel.
 */

import { createApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const url = params.get("ws") ?? "ws://127.0.0.1:8777";

const root = document.getElementById("panel");
if (!root) throw new Error("missing #panel mount point");

const app = createApp({
  url,
  root,
  socketFactory: (u) => new WebSocket(u),
});

app.start().catch((err) => {
  console.error("panel start failed", err);
});
