import type {
  ComparePayload,
  OverlayName,
  Region,
  ViewState,
} from "./types.js";

/** Overlay palette. Conflicts are always yellow; the rest are picked for
 * contrast against both board colors. */
export const OVERLAY_COLORS: Record<OverlayName, string> = {
  old: "#6e7781",
  new: "#0969da",
  deposit: "#2da44e",
  engrave: "#cf222e",
  conflicts: "#ffd33d",
  trim: "#57606a",
};

export const OVERLAY_ORDER: OverlayName[] = [
  "old",
  "new",
  "deposit",
  "engrave",
  "trim",
  "conflicts",
];

const SVG_NS = "http://www.w3.org/2000/svg";
const VIEW_PAD = 2;

function regionPath(region: Region): string {
  const ring = (pts: [number, number][]) =>
    pts.length === 0
      ? ""
      : `M ${pts.map(([x, y]) => `${x} ${y}`).join(" L ")} Z`;
  return [ring(region.outer), ...region.holes.map(ring)]
    .filter((d) => d !== "")
    .join(" ");
}

interface PathStyle {
  fill: string;
  stroke?: string;
  strokeWidth?: string;
}

function appendRegions(
  parent: SVGElement,
  doc: Document,
  regions: Region[],
  style: PathStyle,
): void {
  for (const region of regions) {
    const path = doc.createElementNS(SVG_NS, "path");
    path.setAttribute("d", regionPath(region));
    path.setAttribute("fill", style.fill);
    path.setAttribute("fill-rule", "evenodd");
    if (style.stroke !== undefined) {
      path.setAttribute("stroke", style.stroke);
      path.setAttribute("stroke-width", style.strokeWidth ?? "0.2");
    }
    parent.appendChild(path);
  }
}

function overlayStyle(name: OverlayName): PathStyle {
  // board outlines are drawn hollow so copper overlays stay readable
  if (name === "old" || name === "new") {
    return { fill: "none", stroke: OVERLAY_COLORS[name], strokeWidth: "0.4" };
  }
  if (name === "trim") {
    return {
      fill: "url(#trim-hatch)",
      stroke: OVERLAY_COLORS.trim,
      strokeWidth: "0.15",
    };
  }
  if (name === "conflicts") {
    return {
      fill: OVERLAY_COLORS.conflicts,
      stroke: "#d4a72c",
      strokeWidth: "0.1",
    };
  }
  return { fill: OVERLAY_COLORS[name] };
}

function layeredRegions(
  byLayer: Record<string, Region[]>,
  visible: string[],
): Region[] {
  const out: Region[] = [];
  for (const layer of visible) {
    for (const region of byLayer[layer] ?? []) {
      out.push(region);
    }
  }
  return out;
}

function payloadBounds(
  payload: ComparePayload,
): [number, number, number, number] | null {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  const scan = (regions: Region[]) => {
    for (const region of regions) {
      for (const ring of [region.outer, ...region.holes]) {
        for (const [x, y] of ring) {
          minX = Math.min(minX, x);
          minY = Math.min(minY, y);
          maxX = Math.max(maxX, x);
          maxY = Math.max(maxY, y);
        }
      }
    }
  };
  scan(payload.oldOutline);
  scan(payload.newOutline);
  scan(payload.trim);
  for (const regions of Object.values(payload.deposit)) scan(regions);
  for (const regions of Object.values(payload.engrave)) scan(regions);
  for (const regions of Object.values(payload.conflicts.regions)) {
    scan(regions);
  }
  return minX === Infinity ? null : [minX, minY, maxX, maxY];
}

/** Regions drawn for one overlay at the current layer visibility. */
export function overlayRegions(
  payload: ComparePayload,
  name: OverlayName,
  visibleLayers: string[],
): Region[] {
  switch (name) {
    case "old":
      return payload.oldOutline;
    case "new":
      return payload.newOutline;
    case "deposit":
      return layeredRegions(payload.deposit, visibleLayers);
    case "engrave":
      return layeredRegions(payload.engrave, visibleLayers);
    case "conflicts":
      return layeredRegions(payload.conflicts.regions, visibleLayers);
    case "trim":
      return payload.trim;
  }
}

/** Build the overlay scene as a fresh <svg>. Pure DOM construction from
 * the service payload; every coordinate comes from the wire. */
export function renderOverlay(
  payload: ComparePayload,
  state: ViewState,
  doc: Document = document,
): SVGSVGElement {
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("xmlns", SVG_NS);
  svg.classList.add("board-overlay");

  const bounds = payloadBounds(payload);
  if (bounds !== null) {
    const [minX, minY, maxX, maxY] = bounds;
    const w = maxX - minX + 2 * VIEW_PAD;
    const h = maxY - minY + 2 * VIEW_PAD;
    svg.setAttribute(
      "viewBox",
      `${minX - VIEW_PAD} ${minY - VIEW_PAD} ${w} ${h}`,
    );

    const defs = doc.createElementNS(SVG_NS, "defs");
    const pattern = doc.createElementNS(SVG_NS, "pattern");
    pattern.setAttribute("id", "trim-hatch");
    pattern.setAttribute("width", "1.2");
    pattern.setAttribute("height", "1.2");
    pattern.setAttribute("patternUnits", "userSpaceOnUse");
    pattern.setAttribute("patternTransform", "rotate(45)");
    const hatch = doc.createElementNS(SVG_NS, "rect");
    hatch.setAttribute("width", "0.5");
    hatch.setAttribute("height", "1.2");
    hatch.setAttribute("fill", OVERLAY_COLORS.trim);
    pattern.appendChild(hatch);
    defs.appendChild(pattern);
    svg.appendChild(defs);

    // board Y axis points up; zoom/pan applied around the board center
    const flip = doc.createElementNS(SVG_NS, "g");
    flip.setAttribute(
      "transform",
      `translate(0 ${2 * (minY - VIEW_PAD) + h}) scale(1 -1)`,
    );
    const view = doc.createElementNS(SVG_NS, "g");
    const cx = (minX + maxX) / 2;
    const cy = (minY + maxY) / 2;
    view.setAttribute(
      "transform",
      `translate(${cx + state.pan.x} ${cy + state.pan.y}) ` +
        `scale(${state.zoom}) translate(${-cx} ${-cy})`,
    );
    flip.appendChild(view);
    svg.appendChild(flip);

    for (const name of OVERLAY_ORDER) {
      if (!state.toggles[name]) {
        continue;
      }
      const regions = overlayRegions(payload, name, state.visibleLayers);
      if (regions.length === 0) {
        continue;
      }
      const group = doc.createElementNS(SVG_NS, "g");
      group.setAttribute("data-overlay", name);
      appendRegions(group, doc, regions, overlayStyle(name));
      view.appendChild(group);
    }
  }
  return svg;
}

/** Flip one overlay toggle; the caller re-renders. Toggling twice is a
 * no-op by construction. */
export function toggleOverlay(state: ViewState, name: OverlayName): ViewState {
  return {
    ...state,
    toggles: { ...state.toggles, [name]: !state.toggles[name] },
  };
}
