import { afterEach, describe, expect, it, vi } from "vitest";

import { Client, ServiceError } from "../src/api.js";

function mockFetch(status: number, body: unknown) {
  const fn = vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => body,
  }) as Response);
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => vi.unstubAllGlobals());

describe("Client", () => {
  it("creates sessions and returns the id", async () => {
    const fn = mockFetch(201, { id: "abc123" });
    const id = await new Client("http://x").createSession({ dim: 2 });
    expect(id).toBe("abc123");
    const [url, init] = fn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://x/sessions");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({ dim: 2 });
  });

  it("posts drags with the y payload", async () => {
    const fn = mockFetch(200, { jumped: false, point: { x: [] } });
    await new Client().drag("s1", [1.5, -2]);
    const [url, init] = fn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/sessions/s1/drag");
    expect(JSON.parse(init.body as string)).toEqual({ y: [1.5, -2] });
  });

  it("builds catastrophe queries and handles the building state", async () => {
    mockFetch(503, { status: "building" });
    const out = await new Client().catastrophe("s1", [-4, 4, -4, 4], 100);
    expect(out).toBe("building");
  });

  it("raises typed errors with the service message", async () => {
    mockFetch(422, { error: "y must be 2 finite numbers" });
    await expect(new Client().drag("s1", [1])).rejects.toThrowError(ServiceError);
    mockFetch(422, { error: "y must be 2 finite numbers" });
    await expect(new Client().drag("s1", [1])).rejects.toThrow(/finite numbers/);
  });

  it("encodes energy profile queries", async () => {
    const fn = mockFetch(200, { kind: "circle", theta: [], energy: [] });
    await new Client().energyProfile("s9", [0.25, -1]);
    const [url] = fn.mock.calls[0] as unknown as [string];
    expect(url).toBe("/sessions/s9/energy_profile?y=0.25,-1");
  });
});
