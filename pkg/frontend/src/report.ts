import type { Report } from "./types.js";

/** Rows of the summary table: field key, label, unit. Cell text is the
 * service value verbatim (String(n)); the UI never reformats or
 * recomputes the numbers. */
const SUMMARY_ROWS: [keyof Report & string, string, string][] = [
  ["epoxyMass", "epoxy mass", "mg"],
  ["stencilArea", "stencil area", "mm²"],
  ["fr4AreaSaved", "substrate saved", "mm²"],
  ["costDelta", "cost delta", ""],
  ["timeNew", "time, new board", "s"],
  ["timeDelta", "time delta", "s"],
  ["energyDelta", "energy delta", "J"],
];

export function renderReportTable(
  report: Report,
  doc: Document = document,
): HTMLTableElement {
  const table = doc.createElement("table");
  table.classList.add("report-table");
  const body = doc.createElement("tbody");
  for (const [field, label, unit] of SUMMARY_ROWS) {
    const row = doc.createElement("tr");
    row.dataset["field"] = field;
    const name = doc.createElement("td");
    name.textContent = label;
    const value = doc.createElement("td");
    value.classList.add("value");
    value.textContent = String(report[field]);
    const unitCell = doc.createElement("td");
    unitCell.textContent = unit;
    row.append(name, value, unitCell);
    body.appendChild(row);
  }
  for (const [stage, cost] of Object.entries(report.perStage)) {
    const row = doc.createElement("tr");
    row.dataset["stage"] = stage;
    row.classList.add("stage");
    const name = doc.createElement("td");
    name.textContent = stage;
    const time = doc.createElement("td");
    time.classList.add("value");
    time.textContent = String(cost.time_s);
    const energy = doc.createElement("td");
    energy.classList.add("value");
    energy.textContent = String(cost.energy_j);
    row.append(name, time, energy);
    body.appendChild(row);
  }
  table.appendChild(body);
  return table;
}

export function renderNotes(
  report: Report,
  doc: Document = document,
): HTMLUListElement {
  const list = doc.createElement("ul");
  list.classList.add("report-notes");
  for (const note of report.notes) {
    const item = doc.createElement("li");
    item.textContent = note;
    list.appendChild(item);
  }
  return list;
}

/** Renew-vs-new verdict, keyed on the sign of the price delta the
 * service computed. */
export function verdictText(report: Report): string {
  if (report.costDelta < 0) {
    return "renewing this board costs less than fabricating it new";
  }
  if (report.costDelta > 0) {
    return "fabricating new costs less than renewing this board";
  }
  return "renewing and fabricating new cost the same";
}

export function renderVerdict(
  report: Report,
  doc: Document = document,
): HTMLParagraphElement {
  const line = doc.createElement("p");
  line.classList.add("verdict");
  line.dataset["favorsRenewal"] = String(report.costDelta < 0);
  line.textContent = verdictText(report);
  return line;
}

const SVG_NS = "http://www.w3.org/2000/svg";

/** Radar axes: savings per dimension (positive favors renewal), with a
 * fixed display scale per axis. The mapping is presentation geometry
 * only; no model quantity is derived from another here. */
export const RADAR_AXES: {
  key: string;
  label: string;
  scale: number;
  savings: (r: Report) => number;
}[] = [
  {
    key: "material",
    label: "material",
    scale: 1000,
    savings: (r) => r.fr4AreaSaved,
  },
  { key: "cost", label: "cost", scale: 1, savings: (r) => -r.costDelta },
  { key: "time", label: "time", scale: 600, savings: (r) => -r.timeDelta },
  {
    key: "energy",
    label: "energy",
    scale: 10000,
    savings: (r) => -r.energyDelta,
  },
];

/** Monotone map from a savings value to a radius fraction in (0, 1);
 * break-even lands on 0.5. */
export function radarFraction(savings: number, scale: number): number {
  return Math.atan(savings / scale) / Math.PI + 0.5;
}

export function renderRadarChart(
  report: Report,
  doc: Document = document,
): SVGSVGElement {
  const size = 200;
  const center = size / 2;
  const radius = size / 2 - 18;
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
  svg.classList.add("radar-chart");

  const ringFractions = [0.25, 0.5, 0.75, 1];
  for (const f of ringFractions) {
    const ring = doc.createElementNS(SVG_NS, "circle");
    ring.setAttribute("cx", String(center));
    ring.setAttribute("cy", String(center));
    ring.setAttribute("r", String(radius * f));
    ring.setAttribute("fill", "none");
    ring.setAttribute("stroke", f === 0.5 ? "#8c959f" : "#d0d7de");
    ring.setAttribute("stroke-width", f === 0.5 ? "1" : "0.5");
    svg.appendChild(ring);
  }

  const points: string[] = [];
  RADAR_AXES.forEach((axis, i) => {
    const angle = -Math.PI / 2 + (i * 2 * Math.PI) / RADAR_AXES.length;
    const spoke = doc.createElementNS(SVG_NS, "line");
    spoke.setAttribute("x1", String(center));
    spoke.setAttribute("y1", String(center));
    spoke.setAttribute("x2", String(center + radius * Math.cos(angle)));
    spoke.setAttribute("y2", String(center + radius * Math.sin(angle)));
    spoke.setAttribute("stroke", "#d0d7de");
    spoke.setAttribute("stroke-width", "0.5");
    svg.appendChild(spoke);

    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(center + (radius + 10) * Math.cos(angle)));
    label.setAttribute("y", String(center + (radius + 10) * Math.sin(angle)));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("dominant-baseline", "middle");
    label.setAttribute("font-size", "9");
    label.textContent = axis.label;
    svg.appendChild(label);

    const f = radarFraction(axis.savings(report), axis.scale);
    points.push(
      `${center + radius * f * Math.cos(angle)},` +
        `${center + radius * f * Math.sin(angle)}`,
    );
  });

  const shape = doc.createElementNS(SVG_NS, "polygon");
  shape.setAttribute("points", points.join(" "));
  shape.setAttribute("fill", "#2da44e");
  shape.setAttribute("fill-opacity", "0.25");
  shape.setAttribute("stroke", "#2da44e");
  shape.setAttribute("stroke-width", "1.5");
  shape.classList.add("radar-shape");
  svg.appendChild(shape);
  return svg;
}
