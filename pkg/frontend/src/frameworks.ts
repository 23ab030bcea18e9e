// Bundled framework descriptions, mirrored from the service's example files.
// The UI only chooses among these; topology editing happens in the files.

export const ZEEMAN = {
  name: "zeeman",
  dim: 2,
  nodes: 4,
  bars: [{ i: 1, j: 4, length: 1.0 }],
  cables: [
    { i: 2, j: 4, rest: 1.0, elasticity: 0.5 },
    { i: 3, j: 4, rest: 1.0, elasticity: 0.5 },
  ],
  partition: {
    internal: ["p41", "p42"],
    control: ["p31", "p32"],
    fixed: { p11: 0.0, p12: 0.0, p21: 2.0, p22: -1.0 },
  },
  view: { cx: -0.5, cy: 0.3, scale: 80, rect: [-4, 4, -4, 4] as [number, number, number, number], lines: 150 },
  start: [-1.8, 0.9],
};

export const FOURBAR = {
  name: "fourbar",
  dim: 2,
  nodes: 6,
  bars: [
    { i: 1, j: 2, length: 2.0 },
    { i: 2, j: 3, length: 3.0 },
    { i: 3, j: 4, length: 1.0 },
    { i: 1, j: 4, length: 1.5 },
  ],
  cables: [
    { i: 3, j: 5, rest: 0.1, elasticity: 1.0 },
    { i: 4, j: 6, rest: 0.1, elasticity: 2.0 },
  ],
  partition: {
    internal: ["p31", "p32", "p41", "p42"],
    control: ["p61", "p62"],
    fixed: { p11: -1.0, p12: 0.0, p21: 1.0, p22: 0.0, p51: 4.0, p52: 3.0 },
  },
  view: { cx: 1.0, cy: -0.5, scale: 60, rect: [-2, 4, -4, 1] as [number, number, number, number], lines: 60 },
  start: [1.0, -2.0],
};

export const FRAMEWORKS = { zeeman: ZEEMAN, fourbar: FOURBAR };
