// uPlot wiring: signal line, change point markers, truth shading, and the
// posterior curve on a secondary axis. uPlot is loaded globally by
// index.html (iife build), keeping the frontend bundler-free.

import type { DatasetSeries, PosteriorCurve } from "./api.js";

declare const uPlot: any;

export interface ChartState {
  dataset: DatasetSeries;
  prediction: number[];
  posterior: PosteriorCurve | null;
  overlayVisible: boolean;
}

function drawMarkers(u: any, state: () => ChartState): void {
  const ctx: CanvasRenderingContext2D = u.ctx;
  const { prediction, dataset, posterior, overlayVisible } = state();
  ctx.save();
  ctx.lineWidth = 2;
  ctx.strokeStyle = "rgba(220, 60, 60, 0.9)";
  for (const cp of prediction) {
    const x = u.valToPos(cp, "x", true);
    ctx.beginPath();
    ctx.moveTo(x, u.bbox.top);
    ctx.lineTo(x, u.bbox.top + u.bbox.height);
    ctx.stroke();
  }
  if (dataset.truth) {
    ctx.strokeStyle = "rgba(90, 90, 90, 0.5)";
    ctx.setLineDash([6, 6]);
    for (const cp of dataset.truth) {
      const x = u.valToPos(cp, "x", true);
      ctx.beginPath();
      ctx.moveTo(x, u.bbox.top);
      ctx.lineTo(x, u.bbox.top + u.bbox.height);
      ctx.stroke();
    }
    ctx.setLineDash([]);
  }
  if (overlayVisible && posterior) {
    ctx.strokeStyle = "rgba(40, 110, 220, 0.8)";
    ctx.beginPath();
    posterior.positions.forEach((pos, i) => {
      const x = u.valToPos(pos, "x", true);
      const frac = posterior.cp_prob[i];
      const y = u.bbox.top + (1 - frac) * u.bbox.height;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.restore();
}

export class SeriesChart {
  private plot: any = null;

  constructor(private element: HTMLElement, private state: () => ChartState) {}

  render(): void {
    const { dataset } = this.state();
    const xs = Array.from({ length: dataset.n }, (_, i) => i);
    const data = [xs, ...dataset.series.map((s) => s.values)];
    if (this.plot) {
      this.plot.setData(data);
      this.plot.redraw();
      return;
    }
    const options = {
      width: this.element.clientWidth || 900,
      height: 360,
      scales: { x: { time: false } },
      series: [
        {},
        ...dataset.series.map((s, i) => ({
          label: s.label || `signal ${i}`,
          stroke: ["#2a6f4e", "#8a5a2a", "#513f7a", "#7a3f51"][i % 4],
          width: 1,
        })),
      ],
      hooks: { draw: [(u: any) => drawMarkers(u, this.state)] },
    };
    this.plot = new uPlot(options, data, this.element);
  }

  redraw(): void {
    this.plot?.redraw();
  }

  destroy(): void {
    this.plot?.destroy();
    this.plot = null;
  }
}
