import type {
  BoardSummary,
  ComparePayload,
  Region,
  Report,
} from "../src/types.js";

export function squareRegion(x: number, y: number, size = 5): Region {
  return {
    outer: [
      [x, y],
      [x + size, y],
      [x + size, y + size],
      [x, y + size],
    ],
    holes: [],
  };
}

export function boardSummary(overrides: Partial<BoardSummary> = {}): BoardSummary {
  return {
    layers: ["F.Cu", "B.Cu"],
    bbox: [0, 0, 60, 60],
    netCount: 3,
    footprintRefs: ["U1", "J2"],
    ...overrides,
  };
}

/** Values are deliberately awkward floats: any client-side recomputation
 * would fail the verbatim-display assertions. */
export function comparePayload(): ComparePayload {
  return {
    layers: ["F.Cu", "B.Cu"],
    deposit: {
      "F.Cu": [squareRegion(0, 0)],
      "B.Cu": [squareRegion(20, 0)],
    },
    engrave: {
      "F.Cu": [squareRegion(0, 20)],
      "B.Cu": [],
    },
    conflicts: {
      messages: ["drill-out at (15, 10) overlaps new copper on F.Cu"],
      regions: { "F.Cu": [squareRegion(20, 20)] },
    },
    trim: [squareRegion(40, 0)],
    oldOutline: [squareRegion(0, 0, 60)],
    newOutline: [squareRegion(0, 0, 60)],
    transform: { dx: 10.5, dy: -3.25, rotation: 90 },
    metrics: {
      grooveArea: 12.3456,
      depositPathLen: 78.9012,
      engravePathLen: 34.5678,
      iteration: 2,
    },
  };
}

export function emptyComparePayload(): ComparePayload {
  return {
    layers: [],
    deposit: {},
    engrave: {},
    conflicts: { messages: [], regions: {} },
    trim: [],
    oldOutline: [],
    newOutline: [],
    transform: { dx: 0, dy: 0, rotation: 0 },
    metrics: {},
  };
}

export function report(overrides: Partial<Report> = {}): Report {
  return {
    epoxyMass: 123.45678901234567,
    stencilArea: 88.1257,
    fr4AreaSaved: 2345.6789,
    costDelta: -0.43215678,
    timeNew: 1480.5,
    timeDelta: 1105,
    energyDelta: 20730.000000000004,
    perStage: {
      desolder: { time_s: 60, energy_j: 1320 },
      deposit: { time_s: 100.25, energy_j: 0 },
      cure: { time_s: 900, energy_j: 19800 },
    },
    notes: ["epoxy density is a placeholder; confirm it for the epoxy in use"],
    ...overrides,
  };
}
