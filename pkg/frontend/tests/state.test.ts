import { describe, expect, it } from "vitest";

import type { DragResponse } from "../src/api.js";
import {
  DragSequencer,
  Trail,
  replayPath,
  sameJumpSequence,
} from "../src/state.js";

function point(x: number[]): DragResponse["point"] {
  return {
    x,
    delta: [1, 1],
    energy: 0,
    tension: [true, true],
    stable: true,
    positions: [[0, 0]],
  };
}

describe("DragSequencer", () => {
  it("drops stale responses: only monotonically newer updates apply", () => {
    const seq = new DragSequencer(async () => ({ jumped: false, point: point([0]) }));
    expect(seq.apply(1, [1], { jumped: false, point: point([1]) })).toBe(true);
    expect(seq.apply(0, [0], { jumped: false, point: point([99]) })).toBe(false);
    expect(seq.current?.x).toEqual([1]);
    expect(seq.apply(2, [2], { jumped: true, point: point([2]) })).toBe(true);
    expect(seq.current?.x).toEqual([2]);
    expect(seq.events.map((e) => e.jumped)).toEqual([false, true]);
  });

  it("coalesces rapid requests: at most one in flight, latest target wins", async () => {
    const sent: number[][] = [];
    let release: (() => void) | null = null;
    const seq = new DragSequencer(
      (y) =>
        new Promise<DragResponse>((resolve) => {
          sent.push(y);
          release = () => resolve({ jumped: false, point: point(y) });
        }),
      0,
    );
    seq.request([1]);
    await Promise.resolve();
    seq.request([2]);
    seq.request([3]); // overwrites the queued [2]
    expect(sent).toEqual([[1]]);
    expect(seq.busy).toBe(true);
    release!();
    await new Promise((r) => setTimeout(r, 0));
    expect(sent).toEqual([[1], [3]]);
    release!();
    await new Promise((r) => setTimeout(r, 0));
    expect(seq.busy).toBe(false);
    expect(seq.events.map((e) => e.y)).toEqual([[1], [3]]);
  });

  it("throttles to the configured minimum interval", async () => {
    let now = 0;
    const sent: number[][] = [];
    const seq = new DragSequencer(
      async (y) => {
        sent.push(y);
        return { jumped: false, point: point(y) };
      },
      50,
      () => now,
    );
    seq.request([1]);
    await new Promise((r) => setTimeout(r, 0));
    expect(sent.length).toBe(1);
    seq.request([2]); // too soon: deferred until the interval elapses
    await new Promise((r) => setTimeout(r, 10));
    expect(sent.length).toBe(1);
    now = 60;
    await new Promise((r) => setTimeout(r, 80));
    expect(sent.length).toBe(2);
  });
});

describe("Trail", () => {
  it("keeps at most its capacity, oldest dropped first", () => {
    const trail = new Trail(3);
    for (let i = 0; i < 5; i++) trail.push([i, 0], i);
    expect(trail.list().map((p) => p.y[0])).toEqual([2, 3, 4]);
    trail.clear();
    expect(trail.list()).toEqual([]);
  });
});

describe("replayPath", () => {
  // A deterministic fake service: jumps exactly when y crosses x=0 from the
  // left, mimicking a fold; state persists across calls like a session does.
  function makeService() {
    let side = 1;
    return async (y: number[]): Promise<DragResponse> => {
      const newSide = y[0] >= 0 ? 1 : -1;
      const jumped = newSide !== side;
      side = newSide;
      return { jumped, point: point([side]) };
    };
  }

  it("reproduces identical jump sequences on identical recordings", async () => {
    const recording = [
      [1, 0],
      [0.5, 0],
      [-0.5, 0],
      [-1, 0],
      [0.5, 0],
      [1, 0],
    ];
    const a = await replayPath(makeService(), recording);
    const b = await replayPath(makeService(), recording);
    expect(a.jumps.map((j) => j.index)).toEqual([2, 4]);
    expect(sameJumpSequence(a, b)).toBe(true);
  });

  it("detects differing outcomes", async () => {
    const recording = [
      [1, 0],
      [-1, 0],
    ];
    const a = await replayPath(makeService(), recording);
    const flaky = async (y: number[]): Promise<DragResponse> => ({
      jumped: false,
      point: point(y),
    });
    const b = await replayPath(flaky, recording);
    expect(sameJumpSequence(a, b)).toBe(false);
  });

  it("reports start and end configurations for hysteresis display", async () => {
    const recording = [
      [1, 0],
      [-1, 0],
      [1, 0],
    ];
    const out = await replayPath(makeService(), recording);
    expect(out.startX).toEqual([1]);
    expect(out.endX).toEqual([1]);
  });
});
