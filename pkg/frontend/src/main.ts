// Interactive catastrophe explorer: drag the cross node, the equilibrium
// follows; crossing the red curve can make it jump, and loops need not
// return where they started.

import { Client, type CatastrophePoint, type PointPayload } from "./api.js";
import { FRAMEWORKS } from "./frameworks.js";
import { drawEnergyStrip, drawScene, toWorld, type Viewport } from "./render.js";
import { DragSequencer, Trail, replayPath, sameJumpSequence } from "./state.js";

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
  <div class="bar">
    <select id="framework">
      <option value="zeeman">Zeeman machine</option>
      <option value="fourbar">Elastic four-bar</option>
    </select>
    <label><input type="checkbox" id="overlay"> catastrophe set</label>
    <button id="record">record loop</button>
    <button id="replay" disabled>replay</button>
    <span id="status"></span>
  </div>
  <canvas id="scene" width="840" height="620"></canvas>
  <canvas id="strip" width="840" height="110"></canvas>
  <div id="toasts"></div>
`;

const scene = document.querySelector<HTMLCanvasElement>("#scene")!;
const strip = document.querySelector<HTMLCanvasElement>("#strip")!;
const ctx = scene.getContext("2d")!;
const stripCtx = strip.getContext("2d")!;
const status = document.querySelector<HTMLSpanElement>("#status")!;
const overlayBox = document.querySelector<HTMLInputElement>("#overlay")!;
const recordBtn = document.querySelector<HTMLButtonElement>("#record")!;
const replayBtn = document.querySelector<HTMLButtonElement>("#replay")!;
const picker = document.querySelector<HTMLSelectElement>("#framework")!;

const client = new Client("");

interface Session {
  id: string;
  doc: (typeof FRAMEWORKS)["zeeman"];
  vp: Viewport;
  seq: DragSequencer;
  trail: Trail;
  overlay: CatastrophePoint[] | null;
  ghost: PointPayload | null;
  ghostUntil: number;
  controlY: number[];
  recording: number[][] | null;
  recorded: number[][] | null;
}

let session: Session | null = null;

function toast(msg: string): void {
  const el = document.createElement("div");
  el.className = "toast";
  el.textContent = msg;
  document.querySelector("#toasts")!.appendChild(el);
  setTimeout(() => el.remove(), 2500);
}

async function boot(name: keyof typeof FRAMEWORKS): Promise<void> {
  status.textContent = "starting session (first solve runs once)...";
  const doc = FRAMEWORKS[name];
  const id = await client.createSession(doc);
  const vp: Viewport = {
    cx: doc.view.cx,
    cy: doc.view.cy,
    scale: doc.view.scale,
    w: scene.width,
    h: scene.height,
  };
  const seq = new DragSequencer((y) => client.drag(id, y));
  session = {
    id,
    doc,
    vp,
    seq,
    trail: new Trail(),
    overlay: null,
    ghost: null,
    ghostUntil: 0,
    controlY: doc.start.slice(),
    recording: null,
    recorded: null,
  };
  seq.request(doc.start);
  status.textContent = "";
  overlayBox.checked = false;
  void refreshEnergy();
}

let lastApplied = -1;

function frame(): void {
  if (session) {
    const s = session;
    if (s.ghost && performance.now() > s.ghostUntil) s.ghost = null;
    drawScene(
      ctx, s.vp, s.doc, s.seq.current, s.controlY,
      overlayBox.checked ? s.overlay : null,
      s.trail.list(), s.ghost,
    );
    const applied = s.seq.events.length;
    if (applied !== lastApplied) {
      lastApplied = applied;
      const last = s.seq.events[applied - 1];
      if (last?.jumped) {
        s.ghost = prevPoint;
        s.ghostUntil = performance.now() + 900;
        toast("catastrophe: the equilibrium jumped");
      }
      prevPoint = s.seq.current;
      void refreshEnergy();
    }
  }
  requestAnimationFrame(frame);
}
let prevPoint: PointPayload | null = null;
requestAnimationFrame(frame);

async function refreshEnergy(): Promise<void> {
  if (!session) return;
  try {
    const prof = await client.energyProfile(session.id, session.controlY);
    drawEnergyStrip(stripCtx, strip.width, strip.height, prof);
  } catch {
    // strip is decorative; ignore transient failures
  }
}

let dragging = false;
scene.addEventListener("pointerdown", (e) => {
  dragging = true;
  scene.setPointerCapture(e.pointerId);
});
scene.addEventListener("pointerup", () => {
  dragging = false;
});
scene.addEventListener("pointermove", (e) => {
  if (!dragging || !session) return;
  const rect = scene.getBoundingClientRect();
  const [wx, wy] = toWorld(session.vp, e.clientX - rect.left, e.clientY - rect.top);
  session.controlY = [wx, wy];
  session.trail.push(session.controlY, performance.now());
  session.recording?.push([wx, wy]);
  session.seq.request(session.controlY);
});

overlayBox.addEventListener("change", () => {
  if (overlayBox.checked) void loadOverlay();
});

async function loadOverlay(): Promise<void> {
  if (!session || session.overlay) return;
  status.textContent = "building catastrophe witness...";
  for (;;) {
    const out = await client.catastrophe(session.id, session.doc.view.rect, session.doc.view.lines);
    if (out !== "building") {
      session.overlay = out.points;
      status.textContent = `catastrophe degree ${out.degree}`;
      return;
    }
    await new Promise((r) => setTimeout(r, 5000));
  }
}

recordBtn.addEventListener("click", () => {
  if (!session) return;
  if (session.recording) {
    session.recorded = session.recording;
    session.recording = null;
    recordBtn.textContent = "record loop";
    replayBtn.disabled = !session.recorded?.length;
    toast(`recorded ${session.recorded?.length ?? 0} points`);
  } else {
    session.recording = [];
    session.trail.clear();
    recordBtn.textContent = "stop recording";
  }
});

replayBtn.addEventListener("click", () => void doReplay());

async function doReplay(): Promise<void> {
  // Replays run on fresh sessions so both start from the same equilibrium:
  // on a shared session a second pass would begin wherever the first ended,
  // and a hysteresis loop would (correctly!) jump elsewhere.
  if (!session?.recorded?.length) return;
  const s = session;
  replayBtn.disabled = true;
  status.textContent = "replaying on two fresh sessions...";
  const idA = await client.createSession(s.doc);
  const idB = await client.createSession(s.doc);
  const first = await replayPath((y) => client.drag(idA, y), s.recorded!);
  const second = await replayPath((y) => client.drag(idB, y), s.recorded!);
  const same = sameJumpSequence(first, second);
  status.textContent =
    `replay: ${first.jumps.length} jumps` +
    (same ? " (deterministic across sessions)" : " (MISMATCH across replays)");
  const dx = first.startX && first.endX
    ? Math.max(...first.endX.map((v, i) => Math.abs(v - first.startX![i])))
    : 0;
  if (dx > 1e-3) toast(`hysteresis: end differs from start by ${dx.toFixed(3)}`);
  replayBtn.disabled = false;
}

picker.addEventListener("change", () => void boot(picker.value as keyof typeof FRAMEWORKS));
void boot("zeeman");
