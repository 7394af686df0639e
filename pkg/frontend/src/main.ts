/** Browser entry point: wires the app to the real fetch and localStorage. */

import { createApp } from "./app.js";
import { ApiClient } from "./client.js";
import { PendingQueue } from "./queue.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8080";
const operatorId = params.get("operator") ?? "OP-TERMINAL";

const mount = document.getElementById("app");
if (!mount) {
  throw new Error("missing #app mount point");
}

const client = new ApiClient(apiBase, (url, init) => window.fetch(url, init));
createApp(document, mount, client, new PendingQueue(window.localStorage), { operatorId });
