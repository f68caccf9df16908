// Typed client for the detection service. Every mutating call can carry an
// AbortSignal so a newer slider position can cancel a stale request.

export interface Metrics {
  k: number;
  ae: number;
  mt: number;
  precision: number;
  recall: number;
  f1: number;
  ri: number;
  margin: number;
}

export interface DatasetInfo {
  id: string;
  n: number;
  dt: number;
  labels: string[];
  truth: number[] | null;
  dropped_rows: number;
}

export interface DatasetSeries {
  id: string;
  n: number;
  dt: number;
  series: { label: string; t0: number; values: number[] }[];
  truth: number[] | null;
}

export interface Prediction {
  dataset: string;
  revision: number;
  change_points: number[];
  metrics: Metrics | null;
}

export interface PosteriorCurve {
  dataset: string;
  positions: number[];
  cp_prob: number[];
}

export interface SweepRows {
  dataset: string;
  best_index: number;
  rows: { param: number; change_points: number[]; metrics: Metrics }[];
}

export interface DetectParams {
  method: "pelt" | "win";
  cost: string;
  penalty: number;
  gamma: number;
  half_width: number;
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* keep statusText */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

/** The surface the session layer depends on (stubbed in tests). */
export interface DetectionApi {
  getDataset(id: string): Promise<DatasetSeries>;
  detect(dataset: string, params: DetectParams, signal?: AbortSignal): Promise<Prediction>;
  posterior(dataset: string, kMax?: number, paaWindow?: number,
            signal?: AbortSignal): Promise<PosteriorCurve>;
  peaks(dataset: string, threshold: number, distance: number,
        signal?: AbortSignal): Promise<Prediction>;
  fuse(dataset: string, userBelief: number[],
       signal?: AbortSignal): Promise<PosteriorCurve & { degenerate: number[] }>;
  annotate(dataset: string, action: "add" | "remove", index: number): Promise<Prediction>;
  sweep(dataset: string, method: string, cost: string): Promise<SweepRows>;
}

export class ApiClient implements DetectionApi {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    }).then((resp) => asJson<T>(resp));
  }

  registerSimulated(family: string, n: number, seed: number): Promise<DatasetInfo> {
    return this.post("/datasets", { sim: { family, n, seed } });
  }

  registerCsv(csvText: string, timeColumn: string, valueColumns: string[],
              truth?: number[]): Promise<DatasetInfo> {
    return this.post("/datasets", {
      csv_text: csvText,
      time_column: timeColumn,
      value_columns: valueColumns,
      truth,
    });
  }

  getDataset(id: string): Promise<DatasetSeries> {
    return this.fetchFn(`${this.baseUrl}/datasets/${id}`)
      .then((resp) => asJson<DatasetSeries>(resp));
  }

  detect(dataset: string, params: DetectParams, signal?: AbortSignal): Promise<Prediction> {
    return this.post("/detect", { dataset, ...params }, signal);
  }

  posterior(dataset: string, kMax?: number, paaWindow = 1,
            signal?: AbortSignal): Promise<PosteriorCurve> {
    return this.post("/bayes/posterior",
      { dataset, k_max: kMax, paa_window: paaWindow }, signal);
  }

  peaks(dataset: string, threshold: number, distance: number,
        signal?: AbortSignal): Promise<Prediction> {
    return this.post("/bayes/peaks", { dataset, threshold, distance }, signal);
  }

  fuse(dataset: string, userBelief: number[],
       signal?: AbortSignal): Promise<PosteriorCurve & { degenerate: number[] }> {
    return this.post("/posterior/fuse", { dataset, user_belief: userBelief }, signal);
  }

  annotate(dataset: string, action: "add" | "remove", index: number): Promise<Prediction> {
    return this.post("/annotations", { dataset, action, index });
  }

  sweep(dataset: string, method: string, cost: string): Promise<SweepRows> {
    const query = new URLSearchParams({ method, cost });
    return this.fetchFn(`${this.baseUrl}/sweep/${dataset}?${query}`)
      .then((resp) => asJson<SweepRows>(resp));
  }
}
