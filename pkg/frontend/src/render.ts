// Canvas drawing: framework geometry, catastrophe overlay, energy strip.

import type { CatastrophePoint, EnergyProfile, PointPayload } from "./api.js";

export interface Viewport {
  cx: number; // control-space center
  cy: number;
  scale: number; // pixels per unit
  w: number;
  h: number;
}

export function toScreen(v: Viewport, x: number, y: number): [number, number] {
  return [v.w / 2 + (x - v.cx) * v.scale, v.h / 2 - (y - v.cy) * v.scale];
}

export function toWorld(v: Viewport, px: number, py: number): [number, number] {
  return [v.cx + (px - v.w / 2) / v.scale, v.cy - (py - v.h / 2) / v.scale];
}

export interface FrameworkDoc {
  nodes: number;
  bars: { i: number; j: number }[];
  cables: { i: number; j: number }[];
  partition: { internal: string[]; control: string[]; fixed: Record<string, number> };
}

/** Which node indices are fully fixed / control / internal, from the names. */
export function nodeRoles(doc: FrameworkDoc): Map<number, "fixed" | "control" | "internal"> {
  const roles = new Map<number, "fixed" | "control" | "internal">();
  const owner = (name: string) => parseInt(name[1], 10);
  for (const n of doc.partition.internal) roles.set(owner(n), "internal");
  for (const n of doc.partition.control) roles.set(owner(n), "control");
  for (const n of Object.keys(doc.partition.fixed)) {
    if (!roles.has(owner(n))) roles.set(owner(n), "fixed");
  }
  return roles;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  doc: FrameworkDoc,
  point: PointPayload | null,
  controlY: number[] | null,
  overlay: CatastrophePoint[] | null,
  trail: readonly { y: number[] }[],
  ghost: PointPayload | null,
): void {
  ctx.clearRect(0, 0, vp.w, vp.h);
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, vp.w, vp.h);

  if (overlay) {
    for (const p of overlay) {
      const [sx, sy] = toScreen(vp, p.y[0], p.y[1]);
      if (p.is_C) {
        ctx.fillStyle = "#c0392b";
        ctx.fillRect(sx - 1.5, sy - 1.5, 3, 3);
      } else {
        ctx.strokeStyle = "#b5b8ba";
        ctx.strokeRect(sx - 1.5, sy - 1.5, 3, 3);
      }
    }
  }

  ctx.strokeStyle = "#8e44ad";
  ctx.lineWidth = 1;
  ctx.beginPath();
  trail.forEach((t, i) => {
    const [sx, sy] = toScreen(vp, t.y[0], t.y[1]);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.stroke();

  if (!point) return;
  const pos = point.positions;
  const at = (node: number): [number, number] =>
    toScreen(vp, pos[node - 1][0], pos[node - 1][1]);

  if (ghost) {
    ctx.globalAlpha = 0.25;
    drawEdges(ctx, vp, doc, ghost);
    ctx.globalAlpha = 1.0;
  }
  drawEdges(ctx, vp, doc, point);

  const roles = nodeRoles(doc);
  for (let n = 1; n <= doc.nodes; n++) {
    const [sx, sy] = at(n);
    const role = roles.get(n) ?? "fixed";
    if (role === "fixed") {
      ctx.fillStyle = "#2c3e50";
      ctx.fillRect(sx - 5, sy - 5, 10, 10);
    } else if (role === "control") {
      ctx.strokeStyle = "#8e44ad";
      ctx.lineWidth = 2.5;
      ctx.beginPath();
      ctx.moveTo(sx - 6, sy - 6);
      ctx.lineTo(sx + 6, sy + 6);
      ctx.moveTo(sx - 6, sy + 6);
      ctx.lineTo(sx + 6, sy - 6);
      ctx.stroke();
    } else {
      ctx.fillStyle = "#27ae60";
      ctx.beginPath();
      ctx.arc(sx, sy, 6, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  if (controlY) {
    const [sx, sy] = toScreen(vp, controlY[0], controlY[1]);
    ctx.strokeStyle = "#8e44ad55";
    ctx.beginPath();
    ctx.arc(sx, sy, 10, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

function drawEdges(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  doc: FrameworkDoc,
  point: PointPayload,
): void {
  const pos = point.positions;
  const at = (node: number): [number, number] =>
    toScreen(vp, pos[node - 1][0], pos[node - 1][1]);
  ctx.lineWidth = 3;
  ctx.strokeStyle = "#1b1b1b";
  for (const b of doc.bars) {
    const [ax, ay] = at(b.i);
    const [bx, by] = at(b.j);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }
  doc.cables.forEach((c, k) => {
    const taut = point.tension[k];
    ctx.lineWidth = 2;
    ctx.strokeStyle = taut ? "#27ae60" : "#95a5a6";
    ctx.setLineDash(taut ? [] : [5, 4]);
    const [ax, ay] = at(c.i);
    const [bx, by] = at(c.j);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
    ctx.setLineDash([]);
  });
}

export function drawEnergyStrip(
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number,
  profile: EnergyProfile,
): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, w, h);
  const series: { vals: (number | null)[]; color: string }[] = [];
  if (profile.kind === "circle") {
    series.push({ vals: profile.energy as number[], color: "#2c3e50" });
  } else {
    const e = profile.energy as { plus: (number | null)[]; minus: (number | null)[] };
    series.push({ vals: e.plus, color: "#2c3e50" });
    series.push({ vals: e.minus, color: "#7f8c8d" });
  }
  const finite = series.flatMap((s) => s.vals.filter((v): v is number => v !== null));
  if (!finite.length) return;
  const lo = Math.min(...finite);
  const hi = Math.max(...finite, lo + 1e-9);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.2;
    ctx.beginPath();
    let pen = false;
    s.vals.forEach((v, i) => {
      if (v === null) {
        pen = false;
        return;
      }
      const x = (i / (s.vals.length - 1)) * w;
      const y = h - 4 - ((v - lo) / (hi - lo)) * (h - 8);
      if (!pen) {
        ctx.moveTo(x, y);
        pen = true;
      } else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  const cur = profile.current;
  if (cur) {
    const angle = profile.kind === "circle" ? cur.theta : cur.phi;
    if (angle !== undefined) {
      const x = ((angle % (2 * Math.PI)) / (2 * Math.PI)) * w;
      ctx.strokeStyle = "#27ae60";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, h);
      ctx.stroke();
    }
  }
}
