import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { gaussianBump } from "../src/belief.js";
import { debounce } from "../src/debounce.js";
import { UndoStack } from "../src/undo.js";

describe("gaussianBump", () => {
  const positions = Array.from({ length: 101 }, (_, i) => i);

  it("peaks at the centre with the requested confidence", () => {
    const bump = gaussianBump(positions, 50, 5, 0.9);
    expect(bump[50]).toBeCloseTo(0.9, 10);
    expect(bump[0]).toBeCloseTo(0.5, 5);
    expect(Math.max(...bump)).toBeLessThanOrEqual(1);
  });

  it("confidence below one half expresses disbelief", () => {
    const bump = gaussianBump(positions, 50, 5, 0.1);
    expect(bump[50]).toBeCloseTo(0.1, 10);
    expect(bump[0]).toBeCloseTo(0.5, 5);
  });

  it("validates inputs", () => {
    expect(() => gaussianBump(positions, 50, 0, 0.9)).toThrow();
    expect(() => gaussianBump(positions, 50, 5, 1.5)).toThrow();
  });
});

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("delivers only the last value in a burst", () => {
    const seen: number[] = [];
    const push = debounce((v: number) => seen.push(v), 150);
    push(1);
    vi.advanceTimersByTime(100);
    push(2);
    vi.advanceTimersByTime(100);
    push(3);
    vi.advanceTimersByTime(150);
    expect(seen).toEqual([3]);
  });

  it("cancel drops the pending call", () => {
    const seen: number[] = [];
    const push = debounce((v: number) => seen.push(v), 150);
    push(1);
    push.cancel();
    vi.advanceTimersByTime(500);
    expect(seen).toEqual([]);
  });

  it("flush fires immediately", () => {
    const seen: number[] = [];
    const push = debounce((v: number) => seen.push(v), 150);
    push(7);
    push.flush();
    expect(seen).toEqual([7]);
  });
});

describe("UndoStack", () => {
  it("undo and redo walk the action list", async () => {
    const log: string[] = [];
    const stack = new UndoStack();
    stack.push({ label: "a", undo: () => void log.push("undo-a"),
                 redo: () => void log.push("redo-a") });
    stack.push({ label: "b", undo: () => void log.push("undo-b"),
                 redo: () => void log.push("redo-b") });
    expect(stack.labels).toEqual(["a", "b"]);
    await stack.undo();
    await stack.undo();
    expect(log).toEqual(["undo-b", "undo-a"]);
    expect(stack.canUndo).toBe(false);
    await stack.redo();
    expect(log).toEqual(["undo-b", "undo-a", "redo-a"]);
  });

  it("a new action truncates the redo branch", async () => {
    const stack = new UndoStack();
    stack.push({ label: "a", undo: () => {}, redo: () => {} });
    await stack.undo();
    stack.push({ label: "b", undo: () => {}, redo: () => {} });
    expect(stack.canRedo).toBe(false);
    expect(stack.labels).toEqual(["b"]);
  });
});

describe("ApiClient", () => {
  it("serialises requests and parses responses", async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("http://x/detect");
      const body = JSON.parse(String(init?.body));
      expect(body.dataset).toBe("ds-1");
      expect(body.penalty).toBe(7);
      return new Response(JSON.stringify({
        dataset: "ds-1", revision: 3, change_points: [5], metrics: null,
      }), { status: 200 });
    });
    const client = new ApiClient("http://x", fetchFn as unknown as typeof fetch);
    const result = await client.detect("ds-1", {
      method: "pelt", cost: "l2", penalty: 7, gamma: 1, half_width: 100,
    });
    expect(result.revision).toBe(3);
    expect(result.change_points).toEqual([5]);
  });

  it("raises ApiError with the server detail", async () => {
    const fetchFn = vi.fn(async () => new Response(
      JSON.stringify({ detail: "unknown dataset 'nope'" }), { status: 404 }));
    const client = new ApiClient("http://x", fetchFn as unknown as typeof fetch);
    await expect(client.getDataset("nope")).rejects.toThrowError(ApiError);
    await expect(client.getDataset("nope")).rejects.toThrow("unknown dataset");
  });
});
