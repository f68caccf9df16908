// DOM wiring: dataset loader, parameter sliders (debounced, latest-wins),
// edit/undo controls, metrics panel keyed to the prediction revision.

import { ApiClient } from "./api.js";
import { SeriesChart } from "./chart.js";
import { debounce } from "./debounce.js";
import { DEFAULT_PARAMS, Session, SessionParams } from "./session.js";

const api = new ApiClient(localStorage.getItem("cpd-api") ?? "http://127.0.0.1:8000");
const session = new Session(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let chart: SeriesChart | null = null;
let datasetCache: Awaited<ReturnType<ApiClient["getDataset"]>> | null = null;

function renderMetrics(): void {
  const panel = el<HTMLElement>("metrics");
  if (!session.metricsFresh || !session.metrics) {
    panel.textContent = session.metrics ? "recomputing…" : "no metrics yet";
    return;
  }
  const m = session.metrics;
  panel.innerHTML = [
    `k ${m.k}`, `AE ${m.ae}`, `MT ${m.mt.toFixed(1)}`,
    `precision ${(m.precision * 100).toFixed(1)}%`,
    `recall ${(m.recall * 100).toFixed(1)}%`,
    `F1 ${(m.f1 * 100).toFixed(1)}%`, `RI ${(m.ri * 100).toFixed(1)}%`,
  ].map((part) => `<span class="metric">${part}</span>`).join(" ");
  el<HTMLElement>("revision").textContent = `rev ${session.revision}`;
}

function renderEdits(): void {
  el<HTMLElement>("edits").textContent = session.manualEdits.length
    ? session.manualEdits.map((e) => `${e.action} ${e.index}`).join(", ")
    : "none";
  (el<HTMLButtonElement>("undo")).disabled = !session.undoStack.canUndo;
}

function renderAll(): void {
  renderMetrics();
  renderEdits();
  el<HTMLElement>("points").textContent = session.prediction.join(", ") || "—";
  if (chart && datasetCache) chart.render();
}

session.subscribe(renderAll);

const applyParam = debounce((name: keyof SessionParams, value: number | string) => {
  session.adjustParameter(name, value).then(renderAll).catch(showError);
}, 150);

function showError(err: unknown): void {
  el<HTMLElement>("error").textContent = err instanceof Error ? err.message : String(err);
}

function bindSlider(id: string, name: keyof SessionParams): void {
  const input = el<HTMLInputElement>(id);
  const label = el<HTMLElement>(`${id}-value`);
  input.value = String(DEFAULT_PARAMS[name]);
  label.textContent = input.value;
  input.addEventListener("input", () => {
    label.textContent = input.value;
    applyParam(name, Number(input.value));
  });
}

async function loadDataset(): Promise<void> {
  el<HTMLElement>("error").textContent = "";
  const family = el<HTMLSelectElement>("family").value;
  const n = Number(el<HTMLInputElement>("samples").value);
  const seed = Number(el<HTMLInputElement>("seed").value);
  const info = await api.registerSimulated(family, n, seed);
  session.bindDataset(info.id, info.n);
  datasetCache = await api.getDataset(info.id);
  chart?.destroy();
  chart = new SeriesChart(el("chart"), () => ({
    dataset: datasetCache!,
    prediction: session.prediction,
    posterior: session.posterior,
    overlayVisible: session.overlayVisible,
  }));
  chart.render();
  await session.refresh();
}

function bindControls(): void {
  el<HTMLButtonElement>("load").addEventListener("click", () => {
    loadDataset().catch(showError);
  });
  bindSlider("penalty", "penalty");
  bindSlider("gamma", "gamma");
  bindSlider("threshold", "threshold");
  bindSlider("distance", "distance");
  el<HTMLSelectElement>("method").addEventListener("change", (event) => {
    const method = (event.target as HTMLSelectElement).value;
    session.adjustParameter("method", method).then(renderAll).catch(showError);
  });
  el<HTMLSelectElement>("cost").addEventListener("change", (event) => {
    const cost = (event.target as HTMLSelectElement).value;
    session.adjustParameter("cost", cost).then(renderAll).catch(showError);
  });
  el<HTMLButtonElement>("add-point").addEventListener("click", () => {
    const index = Number(el<HTMLInputElement>("edit-index").value);
    session.editChangePoint("add", index).catch(showError);
  });
  el<HTMLButtonElement>("remove-point").addEventListener("click", () => {
    const index = Number(el<HTMLInputElement>("edit-index").value);
    session.editChangePoint("remove", index).catch(showError);
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    session.undoEdit().catch(showError);
  });
  el<HTMLButtonElement>("overlay").addEventListener("click", () => {
    if (!session.posterior) {
      session.computePosterior().then(() => {
        session.toggleOverlay();
      }).catch(showError);
    } else {
      session.toggleOverlay();
    }
  });
  el<HTMLButtonElement>("sketch").addEventListener("click", () => {
    const center = Number(el<HTMLInputElement>("belief-center").value);
    const width = Number(el<HTMLInputElement>("belief-width").value);
    const confidence = Number(el<HTMLInputElement>("belief-confidence").value);
    session.sketchUserBelief(center, width, confidence).catch(showError);
  });
}

bindControls();
