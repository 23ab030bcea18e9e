// Scene and interaction state, kept free of DOM so it can be unit tested.
//
// The drag pipeline is the delicate part: pointer events arrive faster than
// the service should be hit, responses can return out of order, and a replay
// must reproduce the exact request sequence. Requests therefore carry
// monotonic sequence numbers and stale responses are dropped.

import type { DragResponse, PointPayload } from "./api.js";

export interface DragEventRecord {
  seq: number;
  y: number[];
  jumped: boolean;
}

export class DragSequencer {
  private nextSeq = 0;
  private applied = -1;
  private inFlight = false;
  private pending: number[] | null = null;
  readonly events: DragEventRecord[] = [];
  current: PointPayload | null = null;

  constructor(
    private readonly send: (y: number[]) => Promise<DragResponse>,
    private readonly minIntervalMs = 33,
    private readonly now: () => number = () => Date.now(),
  ) {}

  private lastSent = -Infinity;

  /** Queue a drag target; at most one request in flight, ~30 per second. */
  request(y: number[]): void {
    this.pending = y.slice();
    void this.pump();
  }

  /** True while a response is outstanding or a target is queued. */
  get busy(): boolean {
    return this.inFlight || this.pending !== null;
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.pending === null) return;
    const wait = this.minIntervalMs - (this.now() - this.lastSent);
    if (wait > 0) {
      setTimeout(() => void this.pump(), wait);
      return;
    }
    const y = this.pending;
    this.pending = null;
    const seq = this.nextSeq++;
    this.inFlight = true;
    this.lastSent = this.now();
    try {
      const resp = await this.send(y);
      this.apply(seq, y, resp);
    } catch {
      // dropped update: the next pointer move issues a fresh one
    } finally {
      this.inFlight = false;
      void this.pump();
    }
  }

  /** Apply a response only if it is newer than everything applied so far. */
  apply(seq: number, y: number[], resp: DragResponse): boolean {
    if (seq <= this.applied) return false;
    this.applied = seq;
    this.current = resp.point;
    this.events.push({ seq, y, jumped: resp.jumped });
    return true;
  }
}

export interface TrailPoint {
  y: number[];
  t: number;
}

export class Trail {
  private points: TrailPoint[] = [];

  constructor(readonly capacity = 400) {}

  push(y: number[], t: number): void {
    this.points.push({ y: y.slice(), t });
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  list(): readonly TrailPoint[] {
    return this.points;
  }

  clear(): void {
    this.points = [];
  }
}

export interface ReplayOutcome {
  jumps: { index: number; y: number[] }[];
  startX: number[] | null;
  endX: number[] | null;
}

/**
 * Re-send a recorded control path one request at a time and collect the jump
 * events. Replays await each response, so the outcome is determined by the
 * service alone; running the same recording twice must produce identical
 * jump sequences.
 */
export async function replayPath(
  send: (y: number[]) => Promise<DragResponse>,
  recording: readonly number[][],
): Promise<ReplayOutcome> {
  const jumps: { index: number; y: number[] }[] = [];
  let startX: number[] | null = null;
  let endX: number[] | null = null;
  for (let i = 0; i < recording.length; i++) {
    const resp = await send(recording[i]);
    if (i === 0) startX = resp.point.x.slice();
    endX = resp.point.x.slice();
    if (resp.jumped) jumps.push({ index: i, y: recording[i].slice() });
  }
  return { jumps, startX, endX };
}

export function sameJumpSequence(a: ReplayOutcome, b: ReplayOutcome): boolean {
  if (a.jumps.length !== b.jumps.length) return false;
  return a.jumps.every(
    (j, i) =>
      j.index === b.jumps[i].index &&
      j.y.length === b.jumps[i].y.length &&
      j.y.every((v, k) => Math.abs(v - b.jumps[i].y[k]) < 1e-12),
  );
}
