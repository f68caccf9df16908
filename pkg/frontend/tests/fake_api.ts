// In-memory stand-in for the detection service with the same contract:
// revisions bump on every prediction change, annotations mutate the current
// prediction, peaks read the stored posterior curve.

import {
  DatasetSeries,
  DetectionApi,
  DetectParams,
  Metrics,
  PosteriorCurve,
  Prediction,
  SweepRows,
} from "../src/api.js";

const METRICS: Metrics = {
  k: 2, ae: 0, mt: 0, precision: 1, recall: 1, f1: 1, ri: 1, margin: 10,
};

export class FakeApi implements DetectionApi {
  n = 1000;
  revision = 0;
  current: number[] = [];
  curve: number[];
  detectResult: number[] = [250, 500];
  detectCalls: DetectParams[] = [];
  annotateCalls: { action: string; index: number }[] = [];
  delayMs = 0;
  peaksThresholdSeen: number | null = null;

  constructor() {
    this.curve = new Array(this.n).fill(0.05);
    this.curve[400] = 0.9;
  }

  private async wait(signal?: AbortSignal): Promise<void> {
    if (this.delayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.delayMs));
    }
    if (signal?.aborted) throw new DOMException("aborted", "AbortError");
  }

  private prediction(): Prediction {
    return {
      dataset: "ds-1",
      revision: this.revision,
      change_points: [...this.current],
      metrics: { ...METRICS, k: this.current.length + 1 },
    };
  }

  async getDataset(): Promise<DatasetSeries> {
    return {
      id: "ds-1", n: this.n, dt: 1,
      series: [{ label: "sim", t0: 0, values: new Array(this.n).fill(0) }],
      truth: [250, 500],
    };
  }

  async detect(_dataset: string, params: DetectParams,
               signal?: AbortSignal): Promise<Prediction> {
    await this.wait(signal);
    this.detectCalls.push(params);
    this.current = [...this.detectResult];
    this.revision += 1;
    return this.prediction();
  }

  async posterior(): Promise<PosteriorCurve> {
    return {
      dataset: "ds-1",
      positions: this.curve.map((_, i) => i),
      cp_prob: [...this.curve],
    };
  }

  async peaks(_dataset: string, threshold: number, _distance: number,
              signal?: AbortSignal): Promise<Prediction> {
    await this.wait(signal);
    this.peaksThresholdSeen = threshold;
    this.current = this.curve
      .map((value, i) => ({ value, i }))
      .filter(({ value, i }) => value > threshold && i > 0 && i < this.n - 1
        && value > this.curve[i - 1] && value > this.curve[i + 1])
      .map(({ i }) => i);
    this.revision += 1;
    return this.prediction();
  }

  async fuse(_dataset: string, userBelief: number[]):
      Promise<PosteriorCurve & { degenerate: number[] }> {
    this.curve = this.curve.map((p, i) => {
      const u = userBelief[i];
      const denom = p * u + (1 - p) * (1 - u);
      return denom === 0 ? 0 : (p * u) / denom;
    });
    return {
      dataset: "ds-1",
      positions: this.curve.map((_, i) => i),
      cp_prob: [...this.curve],
      degenerate: [],
    };
  }

  async annotate(_dataset: string, action: "add" | "remove",
                 index: number): Promise<Prediction> {
    this.annotateCalls.push({ action, index });
    if (action === "add") {
      if (!this.current.includes(index)) {
        this.current = [...this.current, index].sort((a, b) => a - b);
      }
    } else {
      if (!this.current.includes(index)) {
        throw new Error(`422: change point ${index} not in set`);
      }
      this.current = this.current.filter((p) => p !== index);
    }
    this.revision += 1;
    return this.prediction();
  }

  async sweep(): Promise<SweepRows> {
    return { dataset: "ds-1", best_index: 0,
             rows: [{ param: 1, change_points: [250, 500], metrics: METRICS }] };
  }
}
