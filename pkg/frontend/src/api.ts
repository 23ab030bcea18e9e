// Typed client for the equilibrium service. The UI never solves anything
// itself: every number on screen originates from these endpoints.

export interface PointPayload {
  x: number[];
  delta: number[];
  energy: number;
  tension: boolean[];
  stable: boolean;
  stratum?: number[];
  positions: number[][];
}

export interface DragResponse {
  jumped: boolean;
  initialized?: boolean;
  point: PointPayload;
  event?: { kind: string; dx: number };
  n_stable?: number;
}

export interface CatastrophePoint {
  y: number[];
  is_C: boolean;
  delta_min: number;
}

export interface CatastropheResponse {
  degree: number;
  points: CatastrophePoint[];
}

export interface EnergyProfile {
  kind: "circle" | "coupler";
  theta?: number[];
  phi?: number[];
  energy: number[] | { plus: (number | null)[]; minus: (number | null)[] };
  current?: { theta?: number; phi?: number; branch?: string };
}

export interface WitnessStatus {
  status: "none" | "building" | "ready" | "failed";
  degree?: number;
  error?: string;
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ServiceError(resp.status, (body as { error?: string }).error ?? resp.statusText);
  }
  return body as T;
}

export class Client {
  constructor(readonly base: string = "") {}

  async createSession(framework: unknown): Promise<string> {
    const resp = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(framework),
    });
    const out = await asJson<{ id: string }>(resp);
    return out.id;
  }

  async drag(session: string, y: number[]): Promise<DragResponse> {
    const resp = await fetch(`${this.base}/sessions/${session}/drag`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ y }),
    });
    return asJson<DragResponse>(resp);
  }

  async witnessStatus(session: string): Promise<WitnessStatus> {
    const resp = await fetch(`${this.base}/sessions/${session}/witness`);
    return asJson<WitnessStatus>(resp);
  }

  async catastrophe(
    session: string,
    rect: [number, number, number, number],
    lines: number,
  ): Promise<CatastropheResponse | "building"> {
    const q = `rect=${rect.join(",")}&lines=${lines}`;
    const resp = await fetch(`${this.base}/sessions/${session}/catastrophe?${q}`);
    if (resp.status === 503) {
      await resp.json().catch(() => ({}));
      return "building";
    }
    return asJson<CatastropheResponse>(resp);
  }

  async energyProfile(session: string, y: number[]): Promise<EnergyProfile> {
    const resp = await fetch(
      `${this.base}/sessions/${session}/energy_profile?y=${y.join(",")}`,
    );
    return asJson<EnergyProfile>(resp);
  }
}
