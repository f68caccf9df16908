// Session state for one analyst working on one dataset.
//
// Rules the UI relies on:
//  - manual edits survive parameter changes: after every fresh detection the
//    recorded edits are re-applied on the server (until explicitly cleared);
//  - metrics are keyed to the server revision of the prediction they were
//    computed for, so a panel is only "fresh" when the revision matches;
//  - at most one detection request is in flight; newer parameter values
//    abort the previous request.

import { DetectionApi, DetectParams, Metrics, Prediction, PosteriorCurve } from "./api.js";
import { UndoStack } from "./undo.js";
import { gaussianBump } from "./belief.js";

export type Method = "pelt" | "win" | "bayes";

export interface SessionParams {
  method: Method;
  cost: string;
  penalty: number;
  gamma: number;
  halfWidth: number;
  threshold: number;
  distance: number;
  kMax: number;
  paaWindow: number;
}

export interface ManualEdit {
  action: "add" | "remove";
  index: number;
}

export const DEFAULT_PARAMS: SessionParams = {
  method: "pelt",
  cost: "l2",
  penalty: 10,
  gamma: 1,
  halfWidth: 100,
  threshold: 0.2,
  distance: 10,
  kMax: 20,
  paaWindow: 1,
};

type Listener = () => void;

export class Session {
  datasetId: string | null = null;
  n = 0;
  params: SessionParams = { ...DEFAULT_PARAMS };
  prediction: number[] = [];
  revision = -1;
  metrics: Metrics | null = null;
  metricsRevision = -1;
  manualEdits: ManualEdit[] = [];
  posterior: PosteriorCurve | null = null;
  overlayVisible = false;
  readonly undoStack = new UndoStack();

  private inflight: AbortController | null = null;
  private listeners: Listener[] = [];

  constructor(private api: DetectionApi) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Metrics panel may only be shown when it describes the visible prediction. */
  get metricsFresh(): boolean {
    return this.metrics !== null && this.metricsRevision === this.revision;
  }

  bindDataset(id: string, n: number): void {
    this.datasetId = id;
    this.n = n;
    this.prediction = [];
    this.revision = -1;
    this.metrics = null;
    this.metricsRevision = -1;
    this.manualEdits = [];
    this.posterior = null;
    this.undoStack.clear();
    this.notify();
  }

  private applyPrediction(result: Prediction): void {
    this.prediction = [...result.change_points];
    this.revision = result.revision;
    this.metrics = result.metrics;
    this.metricsRevision = result.revision;
    this.notify();
  }

  private detectParams(): DetectParams {
    return {
      method: this.params.method === "bayes" ? "pelt" : this.params.method,
      cost: this.params.cost,
      penalty: this.params.penalty,
      gamma: this.params.gamma,
      half_width: this.params.halfWidth,
    };
  }

  /** Run the active method once and re-apply surviving manual edits. */
  async refresh(): Promise<void> {
    if (!this.datasetId) throw new Error("no dataset bound");
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      let result: Prediction;
      if (this.params.method === "bayes") {
        if (!this.posterior) await this.computePosterior(controller.signal);
        result = await this.api.peaks(this.datasetId, this.params.threshold,
                                      this.params.distance, controller.signal);
      } else {
        result = await this.api.detect(this.datasetId, this.detectParams(),
                                       controller.signal);
      }
      result = await this.reapplyEdits(result);
      this.applyPrediction(result);
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  private async reapplyEdits(current: Prediction): Promise<Prediction> {
    let latest = current;
    for (const edit of this.manualEdits) {
      const present = latest.change_points.includes(edit.index);
      if (edit.action === "add" ? present : !present) continue; // inapplicable now
      latest = await this.api.annotate(this.datasetId!, edit.action, edit.index);
    }
    return latest;
  }

  async adjustParameter(name: keyof SessionParams, value: number | string): Promise<void> {
    const previous = this.params[name];
    if (previous === value) return; // re-selecting the same value is a no-op
    (this.params as unknown as Record<string, number | string>)[name] = value;
    await this.refresh();
  }

  /** Manual change point edit with an undoable inverse. */
  async editChangePoint(action: "add" | "remove", index: number): Promise<void> {
    if (!this.datasetId) throw new Error("no dataset bound");
    const present = this.prediction.includes(index);
    if (action === "add" ? present : !present) {
      throw new Error(action === "add"
        ? `index ${index} is already a change point`
        : `index ${index} is not a change point`);
    }
    const result = await this.api.annotate(this.datasetId, action, index);
    this.manualEdits.push({ action, index });
    this.applyPrediction(result);
    const inverse: "add" | "remove" = action === "add" ? "remove" : "add";
    this.undoStack.push({
      label: `${action} ${index}`,
      undo: async () => {
        const restored = await this.api.annotate(this.datasetId!, inverse, index);
        this.manualEdits = this.manualEdits.filter(
          (e) => !(e.action === action && e.index === index));
        this.applyPrediction(restored);
      },
      redo: async () => {
        const redone = await this.api.annotate(this.datasetId!, action, index);
        this.manualEdits.push({ action, index });
        this.applyPrediction(redone);
      },
    });
  }

  async undoEdit(): Promise<void> {
    await this.undoStack.undo();
  }

  clearEdits(): void {
    this.manualEdits = [];
    this.undoStack.clear();
    this.notify();
  }

  async computePosterior(signal?: AbortSignal): Promise<void> {
    if (!this.datasetId) throw new Error("no dataset bound");
    this.posterior = await this.api.posterior(this.datasetId, this.params.kMax,
                                              this.params.paaWindow, signal);
    this.notify();
  }

  /** Fold a bump-shaped user belief into the posterior and refresh peaks. */
  async sketchUserBelief(center: number, width: number,
                         confidence: number): Promise<void> {
    if (!this.datasetId) throw new Error("no dataset bound");
    if (!this.posterior) await this.computePosterior();
    const belief = gaussianBump(this.posterior!.positions, center, width,
                                confidence);
    const fused = await this.api.fuse(this.datasetId, belief);
    this.posterior = { dataset: fused.dataset, positions: fused.positions,
                       cp_prob: fused.cp_prob };
    if (this.params.method === "bayes") {
      const peaks = await this.api.peaks(this.datasetId, this.params.threshold,
                                         this.params.distance);
      this.applyPrediction(await this.reapplyEdits(peaks));
    } else {
      this.notify();
    }
  }

  toggleOverlay(): void {
    this.overlayVisible = !this.overlayVisible;
    this.notify();
  }
}
