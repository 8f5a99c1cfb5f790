// Browser entry: wires the API client, wizard, canvas and dashboard to the
// DOM. All domain results (levels, suggestions, statuses, traces) come from
// the service; this file only renders them.

import { SafClient, ApiError } from "./api.js";
import {
  backoffDelayMs,
  initialDashboard,
  reduceEvent,
  tracePathList,
  type DashboardState,
} from "./dashboard.js";
import { initialCanvas, isStale, revisionSeen, svgLoaded, type CanvasState } from "./canvas.js";
import { SseParser } from "./sse.js";
import { DmDraft, WizardSession, type Dimension } from "./wizard.js";

const client = new SafClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

let dashboard: DashboardState = initialDashboard();
let canvas: CanvasState = initialCanvas();
let session: WizardSession | null = null;
let currentDm: string | null = null;

function paintDashboard(): void {
  const tiles = el<HTMLDivElement>("tiles");
  tiles.innerHTML = "";
  for (const tile of Object.values(dashboard.tiles)) {
    const div = document.createElement("div");
    div.className = `tile tile-${tile.tone}`;
    const value = tile.value === null ? "n/a" : String(tile.value);
    div.innerHTML = `<h3>${tile.kpiId}</h3><p class="state">${tile.state}</p><p>${value}</p>`;
    div.onclick = () => void showTrace(tile.kpiId);
    tiles.appendChild(div);
  }
  const log = el<HTMLUListElement>("action-log");
  log.innerHTML = "";
  for (const entry of dashboard.actionLog) {
    const li = document.createElement("li");
    li.textContent = `${entry.kpiId} missed -> fires [${entry.firedActions.join(", ")}]`;
    log.appendChild(li);
  }
  el<HTMLDivElement>("stale-banner").hidden = !isStale(canvas);
}

async function showTrace(kpiId: string): Promise<void> {
  const trace = await client.trace(kpiId);
  el<HTMLPreElement>("trace").textContent = tracePathList(trace).join("\n");
}

async function refreshCanvas(): Promise<void> {
  if (currentDm === null) {
    return;
  }
  try {
    const response = await fetch(client.renderUrl(currentDm));
    const revision = Number(response.headers.get("x-workspace-revision") ?? "0");
    canvas = svgLoaded(canvas, currentDm, await response.text(), revision);
    el<HTMLDivElement>("canvas").innerHTML = canvas.svg ?? "";
  } catch (error) {
    el<HTMLDivElement>("canvas").textContent = `render failed: ${String(error)}`;
  }
  paintDashboard();
}

async function refreshChecklist(): Promise<void> {
  const report = await client.checklist();
  const list = el<HTMLUListElement>("checklist");
  list.innerHTML = "";
  for (const item of report.items) {
    const li = document.createElement("li");
    li.className = `check-${item.status}`;
    li.textContent = `[${item.status}] ${item.item}: ${item.evidence}`;
    list.appendChild(li);
  }
}

async function refreshSuggestions(): Promise<void> {
  if (currentDm === null || session === null) {
    return;
  }
  const payload = await client.suggestions(currentDm);
  session.loadSuggestions(payload.suggestions);
  const list = el<HTMLUListElement>("suggestions");
  list.innerHTML = "";
  for (const suggestion of session.pendingSuggestions()) {
    const li = document.createElement("li");
    li.textContent = `${suggestion.source_qa} -> ${suggestion.target_qa} ${suggestion.suggested_type} (${suggestion.rationale})`;
    const acceptButton = document.createElement("button");
    acceptButton.textContent = "accept";
    acceptButton.onclick = () => {
      session?.accept(suggestion);
      void submitDraft();
    };
    li.appendChild(acceptButton);
    list.appendChild(li);
  }
}

async function submitDraft(): Promise<void> {
  if (session === null) {
    return;
  }
  const index = await client.workspace();
  try {
    await client.putModel("dm", session.draft.id, session.draft.render(), index.revision);
    session.clearPersisted();
    currentDm = session.draft.id;
    await Promise.all([refreshCanvas(), refreshChecklist(), refreshSuggestions()]);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      el<HTMLDivElement>("wizard-error").textContent =
        "workspace changed underneath you; reloading and replaying the edit";
      await submitDraft();
      return;
    }
    if (error instanceof ApiError) {
      el<HTMLDivElement>("wizard-error").textContent = error.diagnostics
        .map((d) => `${d.code}: ${d.message}`)
        .join("\n");
      return;
    }
    throw error;
  }
}

function wireWizardForm(): void {
  el<HTMLButtonElement>("wizard-start").onclick = () => {
    const id = el<HTMLInputElement>("dm-id").value || "new_map";
    const title = el<HTMLInputElement>("dm-title").value || "New map";
    const system = el<HTMLInputElement>("dm-system").value || "System";
    session = new WizardSession(
      new DmDraft(id, title, system),
      (answers) => client.stepGraph(answers),
      window.localStorage,
    );
    el<HTMLDivElement>("stepper").hidden = false;
  };
  el<HTMLButtonElement>("concern-begin").onclick = async () => {
    if (session === null) {
      return;
    }
    const question = await session.beginConcern(
      el<HTMLSelectElement>("concern-kind").value as "qa" | "requirement",
      el<HTMLInputElement>("concern-id").value,
      el<HTMLInputElement>("concern-name").value,
      el<HTMLSelectElement>("concern-dimension").value as Dimension,
    );
    el<HTMLParagraphElement>("stepper-question").textContent = question ?? "placed.";
  };
  for (const value of ["yes", "no"] as const) {
    el<HTMLButtonElement>(`answer-${value}`).onclick = async () => {
      if (session === null) {
        return;
      }
      const question = await session.answer(value);
      el<HTMLParagraphElement>("stepper-question").textContent =
        question ?? "placed in the engine-chosen band.";
    };
  }
  el<HTMLButtonElement>("wizard-submit").onclick = () => void submitDraft();
}

function listenForEvents(attempt = 1): void {
  const parser = new SseParser();
  fetch(client.eventsUrl())
    .then(async (response) => {
      const reader = response.body?.getReader();
      if (reader === undefined) {
        throw new Error("no stream");
      }
      const decoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) {
          break;
        }
        for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
          dashboard = reduceEvent(dashboard, event);
          if (event.type === "revision") {
            canvas = revisionSeen(canvas, event.data.revision);
          }
        }
        paintDashboard();
      }
      listenForEvents(1);
    })
    .catch(() => {
      // resync after backoff: statuses via GET, then a fresh stream
      setTimeout(() => {
        void bootstrapStatuses();
        listenForEvents(attempt + 1);
      }, backoffDelayMs(attempt));
    });
}

async function bootstrapStatuses(): Promise<void> {
  const listing = await client.kpis();
  for (const kpi of listing.kpis) {
    try {
      const status = await client.kpiStatus(kpi.id);
      dashboard = reduceEvent(dashboard, { type: "kpi_status", data: status });
    } catch {
      // a KPI without data stays a neutral tile
    }
  }
  paintDashboard();
}

async function bootstrap(): Promise<void> {
  const index = await client.workspace();
  dashboard = initialDashboard(index.revision);
  const firstDm = index.documents.find((d) => d.kind === "dm");
  currentDm = firstDm?.id ?? null;
  session = WizardSession.resume((answers) => client.stepGraph(answers), window.localStorage);
  wireWizardForm();
  await Promise.all([refreshCanvas(), refreshChecklist(), bootstrapStatuses()]);
  listenForEvents();
}

void bootstrap();
