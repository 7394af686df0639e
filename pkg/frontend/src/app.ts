/**
 * The capture screen: plate lookup, entry form, verdict display, and the
 * offline pending queue. Plays the role of the plant's handheld terminal,
 * but in a browser against the HTTP API.
 */

import { ApiClient, ApiError, NetworkError } from "./client.js";
import { buildSubmission, canSubmit, emptyForm, type EntryFormState } from "./form.js";
import { denyMessage } from "./messages.js";
import { PendingQueue } from "./queue.js";
import type { Catalogs, PlateSnapshot } from "./types.js";

export interface AppOptions {
  operatorId?: string;
  today?: string;
  sleep?: (ms: number) => Promise<void>;
  catalogAttempts?: number;
}

export interface CaptureApp {
  ready: Promise<void>;
  form: EntryFormState;
  lookup(plateId: string): Promise<void>;
  submit(): Promise<void>;
  drainPending(): Promise<void>;
  refreshControls(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export function createApp(
  doc: Document,
  mount: HTMLElement,
  client: ApiClient,
  queue: PendingQueue,
  options: AppOptions = {},
): CaptureApp {
  const sleep = options.sleep ?? defaultSleep;
  const catalogAttempts = options.catalogAttempts ?? 5;
  const today = options.today ?? new Date().toISOString().slice(0, 10);
  const form = emptyForm(today, options.operatorId ?? "OP-TERMINAL");

  // --- skeleton -------------------------------------------------------
  const plateInput = el(doc, "input", { id: "plate-id", placeholder: "P-00001" });
  const lookupButton = el(doc, "button", { id: "lookup-button" }, ["Look up plate"]);
  const platePanel = el(doc, "div", { id: "plate-panel" });
  const companySelect = el(doc, "select", { id: "company-select" });
  const conditionsBox = el(doc, "div", { id: "conditions-select" });
  const tasksBox = el(doc, "div", { id: "tasks-select" });
  const dateInput = el(doc, "input", { id: "date-input", value: form.date });
  const kindBox = el(doc, "div", { id: "kind-toggle" });
  const submitButton = el(doc, "button", { id: "submit-button", disabled: "" }, ["Record maintenance"]);
  const verdictPanel = el(doc, "div", { id: "verdict-panel" });
  const queueBanner = el(doc, "div", { id: "queue-banner" });
  const catalogBanner = el(doc, "div", { id: "catalog-banner" });

  mount.replaceChildren(
    catalogBanner,
    el(doc, "section", {}, [
      el(doc, "h2", {}, ["Plate"]),
      plateInput,
      lookupButton,
      platePanel,
    ]),
    el(doc, "section", {}, [
      el(doc, "h2", {}, ["Maintenance entry"]),
      el(doc, "label", {}, ["Company ", companySelect]),
      el(doc, "fieldset", {}, [el(doc, "legend", {}, ["Arrival conditions"]), conditionsBox]),
      el(doc, "fieldset", {}, [el(doc, "legend", {}, ["Tasks"]), tasksBox]),
      el(doc, "label", {}, ["Date ", dateInput]),
      kindBox,
      submitButton,
      verdictPanel,
    ]),
    queueBanner,
  );

  // --- rendering ------------------------------------------------------
  function renderQueueBanner(extra = ""): void {
    const pending = queue.length;
    queueBanner.textContent =
      pending > 0
        ? `${pending} capture(s) queued offline, will retry on reconnect. ${extra}`.trim()
        : extra;
  }

  function renderPlate(snapshot: PlateSnapshot): void {
    const recents = snapshot.recent_maintenances.map((record) =>
      el(doc, "li", {}, [`${record.date} ${record.kind} — ${record.total_cost} CLP`]),
    );
    platePanel.replaceChildren(
      el(doc, "p", { class: "plate-status" }, [
        `Status: ${snapshot.status} · Conditions: ${snapshot.conditions.join(", ") || "none"}`,
      ]),
      el(doc, "p", { class: "plate-cost" }, [`Cumulative cost: ${snapshot.cumulative_cost} CLP`]),
      el(doc, "ul", { class: "plate-recents" }, recents),
    );
  }

  function renderVerdict(kind: "accepted" | "denied" | "queued", lines: string[]): void {
    verdictPanel.replaceChildren(
      el(doc, "p", { class: `verdict verdict-${kind}` }, [lines.join(" ")]),
    );
  }

  function refreshControls(): void {
    if (canSubmit(form)) {
      submitButton.removeAttribute("disabled");
    } else {
      submitButton.setAttribute("disabled", "");
    }
  }

  // --- catalogs with startup retry -------------------------------------
  function populateCatalogs(catalogs: Catalogs): void {
    companySelect.replaceChildren(
      el(doc, "option", { value: "" }, ["— select —"]),
      ...catalogs.companies.map((company) =>
        el(doc, "option", { value: company.id }, [company.name]),
      ),
    );
    conditionsBox.replaceChildren(
      ...catalogs.conditions.map((condition) =>
        el(doc, "label", {}, [
          el(doc, "input", { type: "checkbox", name: "condition", value: condition.code }),
          condition.label,
        ]),
      ),
    );
    tasksBox.replaceChildren(
      ...catalogs.tasks.map((task) =>
        el(doc, "label", {}, [
          el(doc, "input", { type: "checkbox", name: "task", value: task.code }),
          `${task.label} (${task.default_cost} CLP)`,
        ]),
      ),
    );
    kindBox.replaceChildren(
      ...(["minor", "major"] as const).map((value) =>
        el(doc, "label", {}, [
          el(
            doc,
            "input",
            value === form.kind
              ? { type: "radio", name: "kind", value, checked: "" }
              : { type: "radio", name: "kind", value },
          ),
          value,
        ]),
      ),
    );
  }

  async function loadCatalogs(): Promise<void> {
    for (let attempt = 1; attempt <= catalogAttempts; attempt += 1) {
      try {
        const [tasks, companies, conditions] = await Promise.all([
          client.fetchTasks(),
          client.fetchCompanies(),
          client.fetchConditions(),
        ]);
        populateCatalogs({ tasks, companies, conditions });
        catalogBanner.textContent = "";
        return;
      } catch {
        catalogBanner.textContent = `Cannot reach the server (attempt ${attempt}).`;
        if (attempt < catalogAttempts) {
          await sleep(Math.min(250 * 2 ** (attempt - 1), 4000));
        }
      }
    }
    const retry = el(doc, "button", { id: "catalog-retry" }, ["Retry"]);
    retry.addEventListener("click", () => void loadCatalogs());
    catalogBanner.replaceChildren("Server unreachable; catalogs not loaded. ", retry);
  }

  // --- actions ----------------------------------------------------------
  async function lookup(plateId: string): Promise<void> {
    form.plateId = plateId;
    plateInput.value = plateId;
    refreshControls();
    try {
      renderPlate(await client.lookupPlate(plateId));
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        platePanel.replaceChildren(el(doc, "p", { class: "plate-missing" }, ["Plate not found."]));
      } else if (err instanceof NetworkError) {
        const retry = el(doc, "button", { class: "lookup-retry" }, ["Retry lookup"]);
        retry.addEventListener("click", () => void lookup(plateId));
        platePanel.replaceChildren("Server unreachable. ", retry);
      } else if (err instanceof ApiError) {
        platePanel.replaceChildren(el(doc, "p", {}, [`Lookup failed: ${err.message}`]));
      } else {
        throw err;
      }
    }
  }

  async function submit(): Promise<void> {
    if (!canSubmit(form)) {
      return;
    }
    const submission = buildSubmission(form);
    form.status = "submitting";
    refreshControls();
    try {
      const accepted = await client.submitCapture(submission);
      form.status = "accepted";
      renderVerdict("accepted", [
        `Recorded ${accepted.maintenance_id}.`,
        `Plate cumulative cost is now ${accepted.plate_cumulative_cost} CLP.`,
      ]);
      await lookup(form.plateId).catch(() => undefined);
    } catch (err) {
      if (err instanceof ApiError) {
        form.status = "denied";
        renderVerdict("denied", [`Denied [${err.code}]:`, denyMessage(err.code)]);
      } else if (err instanceof NetworkError) {
        queue.enqueue(submission);
        form.status = "queued_offline";
        renderVerdict("queued", [
          "Server unreachable; the capture was queued and will be sent on reconnect.",
        ]);
        renderQueueBanner();
      } else {
        form.status = "editing";
        throw err;
      }
    } finally {
      if (form.status === "submitting") {
        form.status = "editing";
      }
      refreshControls();
    }
  }

  async function drainPending(): Promise<void> {
    if (queue.length === 0) {
      return;
    }
    const report = await queue.drain((submission) => client.submitCapture(submission));
    const notes: string[] = [];
    if (report.delivered > 0) {
      notes.push(`${report.delivered} queued capture(s) delivered.`);
    }
    for (const rejected of report.rejected) {
      notes.push(`Queued capture rejected [${rejected.code}]: ${denyMessage(rejected.code)}`);
    }
    renderQueueBanner(notes.join(" "));
    if (report.delivered > 0 && form.plateId) {
      await lookup(form.plateId).catch(() => undefined);
    }
  }

  // --- event wiring -----------------------------------------------------
  plateInput.addEventListener("input", () => {
    form.plateId = plateInput.value;
    refreshControls();
  });
  lookupButton.addEventListener("click", () => void lookup(plateInput.value));
  companySelect.addEventListener("change", () => {
    form.companyId = companySelect.value;
    refreshControls();
  });
  dateInput.addEventListener("input", () => {
    form.date = dateInput.value;
    refreshControls();
  });
  conditionsBox.addEventListener("change", () => {
    form.arrivalConditions = Array.from(
      conditionsBox.querySelectorAll<HTMLInputElement>("input:checked"),
      (box) => box.value,
    );
    refreshControls();
  });
  tasksBox.addEventListener("change", () => {
    form.taskCodes = Array.from(
      tasksBox.querySelectorAll<HTMLInputElement>("input:checked"),
      (box) => box.value,
    );
    refreshControls();
  });
  kindBox.addEventListener("change", () => {
    const picked = kindBox.querySelector<HTMLInputElement>("input:checked");
    if (picked && (picked.value === "major" || picked.value === "minor")) {
      form.kind = picked.value;
    }
  });
  submitButton.addEventListener("click", () => void submit());
  doc.defaultView?.addEventListener("online", () => void drainPending());

  renderQueueBanner();
  const ready = loadCatalogs();
  return { ready, form, lookup, submit, drainPending, refreshControls };
}
