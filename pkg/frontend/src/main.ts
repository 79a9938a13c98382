/**
 * Browser entry point: wires the editor session, canvas painter, and run
 * console to DOM controls. All logic lives in the imported modules; this
 * file is only event plumbing.
 */

import { GatewayClient } from "./api.js";
import {
  EditorSession,
  emptyScenario,
  filterObstacleKinds,
  type Tool,
} from "./editor.js";
import {
  drawFrame,
  drawScenario,
  fitView,
  screenToWorld,
  type Draw2D,
  type View,
} from "./render.js";
import { RunConsole, totalsConsistent } from "./runconsole.js";
import { END_CONDITION_KINDS, type Vec2 } from "./types.js";

const client = new GatewayClient(
  (window as { METIS_BASE_URL?: string }).METIS_BASE_URL ?? "http://127.0.0.1:8000",
);

const canvas = document.getElementById("plan") as HTMLCanvasElement;
// the painter only ever assigns color strings, so the wider union is fine
const ctx = canvas.getContext("2d")! as unknown as Draw2D;
const statusLine = document.getElementById("status") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;
const palette = document.getElementById("palette") as HTMLElement;
const paletteFilter = document.getElementById("palette-filter") as HTMLInputElement;
const scenarioSelect = document.getElementById("scenario-select") as HTMLSelectElement;
const resultsDialog = document.getElementById("results") as HTMLDialogElement;

let session = new EditorSession(emptyScenario("untitled"));
let view: View = fitView(session.doc, canvas.width, canvas.height);

const console_ = new RunConsole(client, {
  onEnded: (r) => {
    const ok = totalsConsistent(r);
    resultsDialog.innerHTML =
      `<p><b>${r.end_reason}</b> after ${r.elapsed_ticks} ticks</p>` +
      `<p>safe ${r.survived} &middot; dead ${r.died} &middot; unresolved ${r.unresolved} ` +
      `of ${r.total}${ok ? "" : " (totals mismatch!)"}</p>` +
      `<form method="dialog"><button>close</button></form>`;
    resultsDialog.showModal();
  },
  onStatus: (s) => say(`run: ${s}`),
});

function say(text: string): void {
  statusLine.textContent = text;
}

function showBanner(text: string | null): void {
  banner.textContent = text ?? "";
  if (text) {
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.onclick = async () => {
      if (await console_.retry()) showBanner(null);
    };
    banner.appendChild(retry);
  }
  banner.style.display = text ? "block" : "none";
}

function repaint(): void {
  drawScenario(ctx, session.doc, view, {
    preview: session.previewStroke(),
    selection: session.selection,
  });
  if (console_.lastFrame) drawFrame(ctx, console_.lastFrame, view);
  if (console_.bannerError) showBanner(console_.bannerError);
}

function refit(): void {
  view = fitView(session.doc, canvas.width, canvas.height);
}

// -- pointer events -------------------------------------------------------

function eventPoint(ev: MouseEvent): Vec2 {
  const r = canvas.getBoundingClientRect();
  return screenToWorld(view, [ev.clientX - r.left, ev.clientY - r.top]);
}

let dragging = false;
let moved = false;

canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button !== 0) return;
  dragging = true;
  moved = false;
  session.beginStroke(eventPoint(ev));
  repaint();
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  moved = true;
  session.updateStroke(eventPoint(ev));
  repaint();
});

canvas.addEventListener("pointerup", (ev) => {
  if (!dragging) return;
  dragging = false;
  const p = eventPoint(ev);
  const strokeTools = new Set(["wall", "safe_area", "spawn_area", "grab"]);
  const result =
    strokeTools.has(session.tool.kind) && (moved || session.tool.kind !== "grab")
      ? session.endStroke(p)
      : session.click(p);
  if (!result.ok && result.reason) say(result.reason);
  refit();
  repaint();
});

canvas.addEventListener("contextmenu", (ev) => {
  ev.preventDefault();
  const p = eventPoint(ev);
  if (console_.status === "running" || console_.status === "paused") {
    void console_.inject(p).then((tick) => {
      if (tick !== null) say(`fire injected, effective tick ${tick}`);
      else if (console_.injectionIssues.length) {
        say(console_.injectionIssues.map((i) => `${i.code}: ${i.detail}`).join("; "));
      }
    });
    return;
  }
  if (session.toggleExitAt(p)) {
    say("toggled exit flag");
    repaint();
  }
});

// -- toolbar --------------------------------------------------------------

const TOOLBAR: [string, () => Tool][] = [
  ["select", () => ({ kind: "select" })],
  ["wall", () => ({ kind: "wall" })],
  ["door", () => ({ kind: "door" })],
  ["pedestrian", () => ({ kind: "pedestrian", type: "adult" })],
  ["fire", () => ({ kind: "fire" })],
  ["safe area", () => ({ kind: "safe_area" })],
  ["spawn area", () => ({ kind: "spawn_area" })],
  ["grab", () => ({ kind: "grab" })],
];

const toolbar = document.getElementById("toolbar")!;
for (const [label, make] of TOOLBAR) {
  const b = document.createElement("button");
  b.textContent = label;
  b.onclick = () => {
    session.setTool(make());
    say(`tool: ${label}`);
  };
  toolbar.appendChild(b);
}

function renderPalette(): void {
  palette.innerHTML = "";
  for (const kind of filterObstacleKinds(paletteFilter.value)) {
    const b = document.createElement("button");
    b.textContent = kind;
    b.onclick = () => {
      session.setTool({ kind: "object", object: kind });
      say(`tool: object(${kind})`);
    };
    palette.appendChild(b);
  }
}
paletteFilter.oninput = renderPalette;
renderPalette();

(document.getElementById("undo") as HTMLButtonElement).onclick = () => {
  say(session.undo() ? "undid last edit" : "nothing to undo");
  repaint();
};
(document.getElementById("snap-mode") as HTMLButtonElement).onclick = (ev) => {
  session.snapMode = session.snapMode === "grid" ? "edge" : "grid";
  (ev.target as HTMLButtonElement).textContent = `snap: ${session.snapMode}`;
};

// -- scenario persistence -------------------------------------------------

async function refreshScenarioList(): Promise<void> {
  try {
    const items = await client.listScenarios();
    scenarioSelect.innerHTML = "";
    for (const s of items) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = s.name ? `${s.id} (${s.name})` : s.id;
      scenarioSelect.appendChild(opt);
    }
    showBanner(null);
  } catch {
    showBanner("gateway unreachable");
  }
}

(document.getElementById("open") as HTMLButtonElement).onclick = async () => {
  const sid = scenarioSelect.value;
  if (!sid) return;
  try {
    session = await EditorSession.open(client, sid);
    refit();
    repaint();
    say(`opened ${sid}`);
  } catch (e) {
    say(String(e));
  }
};

(document.getElementById("new") as HTMLButtonElement).onclick = () => {
  const id = prompt("scenario id", "untitled") ?? "untitled";
  session = new EditorSession(emptyScenario(id));
  refit();
  repaint();
};

(document.getElementById("save") as HTMLButtonElement).onclick = async () => {
  try {
    let result = await session.save(client);
    if (!result.ok) {
      const list = result.issues.map((i) => `${i.code} ${i.entity}: ${i.detail}`).join("\n");
      if (confirm(`validation failed:\n${list}\n\nsave anyway?`)) {
        result = await session.save(client, { override: true });
      }
    }
    say(result.ok ? `saved ${session.doc.id}` : "save cancelled");
    await refreshScenarioList();
  } catch (e) {
    showBanner("gateway unreachable");
    say(String(e));
  }
};

// -- run controls ---------------------------------------------------------

function endConditions(): string[] {
  const out: string[] = [];
  for (const kind of END_CONDITION_KINDS) {
    const box = document.getElementById(`ec-${kind}`) as HTMLInputElement | null;
    if (!box?.checked) continue;
    const arg = (document.getElementById(`ec-${kind}-arg`) as HTMLInputElement | null)?.value;
    out.push(kind === "all_resolved" ? kind : `${kind}:${arg ?? ""}`);
  }
  return out;
}

(document.getElementById("play") as HTMLButtonElement).onclick = async () => {
  if (session.dirty) {
    say("save the scenario before running it");
    return;
  }
  const seed = Number((document.getElementById("seed") as HTMLInputElement).value || "0");
  const speed = Number((document.getElementById("speed") as HTMLInputElement).value || "1");
  const ok = await console_.play(session.doc.id, {
    seed,
    speed,
    end_conditions: endConditions(),
  });
  if (!ok) showBanner(console_.bannerError);
};
(document.getElementById("pause") as HTMLButtonElement).onclick = () => void console_.pause();
(document.getElementById("resume") as HTMLButtonElement).onclick = () => void console_.resume();
(document.getElementById("stop") as HTMLButtonElement).onclick = () => void console_.stop();

// -- boot -----------------------------------------------------------------

void refreshScenarioList();
setInterval(repaint, 33); // ~30 fps, matching the stream's coalescing rate
repaint();
