/** Wire types for the renewal service. Field names mirror the JSON
 * contract exactly; nothing here is recomputed client-side. */

export type BoardRole = "old" | "new";

export interface ParseDiagnostic {
  severity: string;
  line: number;
  message: string;
}

export interface BoardSummary {
  layers: string[];
  bbox: [number, number, number, number];
  netCount: number;
  footprintRefs: string[];
  diagnostics?: ParseDiagnostic[];
}

/** One polygon: outer ring plus zero or more hole rings. */
export interface Region {
  outer: [number, number][];
  holes: [number, number][][];
}

export interface TransformPayload {
  dx: number;
  dy: number;
  rotation: number;
}

export type Corner = "BL" | "BR" | "TL" | "TR";

export type AlignmentSpec =
  | { mode: "bboxCorner"; corner: Corner }
  | { mode: "footprintCenter"; refOld: string; refNew: string }
  | { mode: "explicitTransform"; transform: TransformPayload };

export interface ComparePayload {
  layers: string[];
  deposit: Record<string, Region[]>;
  engrave: Record<string, Region[]>;
  conflicts: {
    messages: string[];
    regions: Record<string, Region[]>;
  };
  trim: Region[];
  oldOutline: Region[];
  newOutline: Region[];
  transform: TransformPayload;
  metrics: Record<string, number>;
}

export interface StageCost {
  time_s: number;
  energy_j: number;
}

export interface Report {
  epoxyMass: number;
  stencilArea: number;
  fr4AreaSaved: number;
  costDelta: number;
  timeNew: number;
  timeDelta: number;
  energyDelta: number;
  perStage: Record<string, StageCost>;
  notes: string[];
}

export type ExportKind =
  | "plan.json"
  | "stencil.svg"
  | "engrave.svg"
  | "engrave.gcode"
  | "report.json";

export type OverlayName =
  | "old"
  | "new"
  | "deposit"
  | "engrave"
  | "conflicts"
  | "trim";

export interface ViewState {
  sessionId: string | null;
  /** Copper layers currently drawn; a subset of the payload's layers. */
  visibleLayers: string[];
  toggles: Record<OverlayName, boolean>;
  zoom: number;
  pan: { x: number; y: number };
  /** Param overrides typed into the form; blank fields stay server-side. */
  paramValues: Record<string, number>;
  lastReport: Report | null;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    visibleLayers: [],
    toggles: {
      old: true,
      new: true,
      deposit: true,
      engrave: true,
      conflicts: true,
      trim: true,
    },
    zoom: 1,
    pan: { x: 0, y: 0 },
    paramValues: {},
    lastReport: null,
  };
}
