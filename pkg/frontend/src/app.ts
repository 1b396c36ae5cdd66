import { AlignmentPicker, CORNERS } from "./alignment.js";
import { ApiClient, ApiError } from "./api.js";
import { OVERLAY_COLORS, renderOverlay, toggleOverlay } from "./overlay.js";
import {
  renderNotes,
  renderRadarChart,
  renderReportTable,
  renderVerdict,
} from "./report.js";
import type {
  BoardRole,
  BoardSummary,
  ComparePayload,
  ExportKind,
  OverlayName,
  ViewState,
} from "./types.js";
import { initialViewState } from "./types.js";

const ROLES: BoardRole[] = ["old", "new"];

const OVERLAY_TOGGLES: OverlayName[] = [
  "old",
  "new",
  "deposit",
  "engrave",
  "trim",
  "conflicts",
];

const EXPORT_KINDS: ExportKind[] = [
  "plan.json",
  "stencil.svg",
  "engrave.svg",
  "engrave.gcode",
  "report.json",
];

/** Override form fields: service parameter key plus a hover hint. Blank
 * fields are never sent, so server defaults stay server-side. */
const PARAM_FIELDS: [string, string][] = [
  ["rho_e", "epoxy density, mg/mm^3"],
  ["depositionDepthOffset", "extra fill depth, mm"],
  ["p_u_e", "epoxy unit price, per mg"],
  ["p_u_s", "stencil sheet unit price, per mm^2"],
  ["p_u_fr4", "substrate unit price, per mm^2"],
  ["F_t", "trace engraving feed, mm/min"],
  ["F_o", "outline engraving feed, mm/min"],
  ["dz_t", "trace step-down per pass, mm"],
  ["dz_o", "outline step-down per pass, mm"],
  ["d_o", "board thickness, mm"],
  ["F_d", "deposition feed, mm/s"],
  ["F_l", "stencil laser feed, mm/s"],
  ["T_de", "desoldering time, s"],
  ["t_p", "pad cleaning time, s per pad"],
  ["T_c", "epoxy cure time, s"],
  ["P_de", "desolder station power, W"],
  ["P_i", "soldering iron power, W"],
  ["P_d", "depositor power, W"],
  ["P_c", "cure oven power, W"],
  ["P_l", "laser power, W"],
  ["P_e", "engraver power, W"],
];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function formatError(exc: unknown): string {
  if (exc instanceof ApiError) {
    const detail = exc.detail;
    if (detail && typeof detail === "object" && "message" in detail) {
      const info = detail as { message: string; diagnostics?: unknown[] };
      const extra = info.diagnostics ? ` (${info.diagnostics.length} diagnostic(s))` : "";
      return `${info.message}${extra}`;
    }
    return typeof detail === "string" ? detail : `request failed (${exc.status})`;
  }
  return String(exc);
}

/** Single-page shell wiring the picker, overlay, and report renderers to
 * the session API. All mutating requests are serialized: the controls
 * that trigger them are disabled while one is pending. */
export class App {
  state: ViewState = initialViewState();
  readonly picker = new AlignmentPicker();
  lastCompare: ComparePayload | null = null;
  private summaries: Record<BoardRole, BoardSummary | null> = {
    old: null,
    new: null,
  };
  private busy = false;
  private readonly doc: Document;

  private statusEl!: HTMLElement;
  private overlayHost!: HTMLElement;
  private conflictHost!: HTMLElement;
  private metricsHost!: HTMLElement;
  private layerHost!: HTMLElement;
  private reportHost!: HTMLElement;
  private exportHost!: HTMLElement;
  private transformEl!: HTMLElement;
  private alignButton!: HTMLButtonElement;
  private compareButton!: HTMLButtonElement;
  private analyzeButton!: HTMLButtonElement;
  private persistBox!: HTMLInputElement;
  private summaryEls!: Record<BoardRole, HTMLElement>;
  private pickEls!: Record<BoardRole, HTMLElement>;
  private footprintSelects!: Record<BoardRole, HTMLSelectElement>;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient(),
  ) {
    this.doc = root.ownerDocument;
    this.build();
  }

  // ---------------------------------------------------------------- layout

  private build(): void {
    const doc = this.doc;
    this.statusEl = el(doc, "p", { id: "status", role: "status" });
    this.root.append(
      el(doc, "h1", {}, "board renewal planner"),
      this.statusEl,
      this.buildBoardsSection(),
      this.buildAlignSection(),
      this.buildCompareSection(),
      this.buildAnalyzeSection(),
    );
  }

  private buildBoardsSection(): HTMLElement {
    const doc = this.doc;
    this.summaryEls = {
      old: el(doc, "div", { class: "board-summary" }),
      new: el(doc, "div", { class: "board-summary" }),
    };
    const section = el(doc, "section", { id: "boards" }, el(doc, "h2", {}, "boards"));
    for (const role of ROLES) {
      const input = el(doc, "input", {
        type: "file",
        class: "mutating",
        id: `board-file-${role}`,
        accept: ".kicad_pcb,.json,application/json",
      });
      input.addEventListener("change", () => {
        void this.onBoardFile(role, input);
      });
      section.append(
        el(
          doc,
          "div",
          { class: "board-slot", "data-role": role },
          el(doc, "label", { for: `board-file-${role}` }, `${role} board`),
          input,
          this.summaryEls[role],
        ),
      );
    }
    return section;
  }

  private buildAlignSection(): HTMLElement {
    const doc = this.doc;
    this.pickEls = {
      old: el(doc, "span", { class: "pick" }),
      new: el(doc, "span", { class: "pick" }),
    };
    this.footprintSelects = {
      old: el(doc, "select", { class: "mutating", "data-role": "old" }),
      new: el(doc, "select", { class: "mutating", "data-role": "new" }),
    };
    const section = el(
      doc,
      "section",
      { id: "align" },
      el(doc, "h2", {}, "alignment"),
    );
    for (const role of ROLES) {
      const row = el(
        doc,
        "div",
        { class: "align-row", "data-role": role },
        el(doc, "span", { class: "role-label" }, role),
      );
      for (const corner of CORNERS) {
        const btn = el(
          doc,
          "button",
          {
            type: "button",
            class: "corner mutating",
            "data-role": role,
            "data-corner": corner,
          },
          corner,
        );
        btn.addEventListener("click", () => {
          this.picker.pickCorner(role, corner);
          this.refreshPicks();
        });
        row.appendChild(btn);
      }
      const select = this.footprintSelects[role];
      select.appendChild(el(doc, "option", { value: "" }, "footprint..."));
      select.addEventListener("change", () => {
        if (select.value) {
          this.picker.pickFootprint(role, select.value);
        }
        this.refreshPicks();
      });
      row.append(select, this.pickEls[role]);
      section.appendChild(row);
    }
    this.alignButton = el(
      doc,
      "button",
      { type: "button", id: "align-btn", class: "mutating" },
      "align",
    );
    this.alignButton.disabled = true;
    this.alignButton.addEventListener("click", () => {
      void this.onAlign();
    });
    this.transformEl = el(doc, "span", { id: "transform" });
    section.append(this.alignButton, this.transformEl);
    return section;
  }

  private buildCompareSection(): HTMLElement {
    const doc = this.doc;
    this.layerHost = el(doc, "div", { id: "layers" });
    this.compareButton = el(
      doc,
      "button",
      { type: "button", id: "compare-btn", class: "mutating" },
      "compare",
    );
    this.compareButton.addEventListener("click", () => {
      void this.withBusy(() => this.compareNow());
    });

    const toggles = el(doc, "div", { id: "toggles" });
    for (const name of OVERLAY_TOGGLES) {
      const box = el(doc, "input", {
        type: "checkbox",
        "data-overlay": name,
        id: `toggle-${name}`,
      });
      box.checked = this.state.toggles[name];
      box.addEventListener("change", () => {
        this.state = toggleOverlay(this.state, name);
        this.renderOverlayNow();
      });
      toggles.append(
        el(
          doc,
          "label",
          { for: `toggle-${name}`, style: `border-color: ${OVERLAY_COLORS[name]}` },
          box,
          name,
        ),
      );
    }

    const zoomBar = el(doc, "div", { id: "zoom-bar" });
    const zoomed = (factor: number) => {
      this.state = { ...this.state, zoom: this.state.zoom * factor };
      this.renderOverlayNow();
    };
    const zoomIn = el(doc, "button", { type: "button" }, "+");
    zoomIn.addEventListener("click", () => zoomed(1.25));
    const zoomOut = el(doc, "button", { type: "button" }, "−");
    zoomOut.addEventListener("click", () => zoomed(1 / 1.25));
    const resetView = el(doc, "button", { type: "button" }, "reset view");
    resetView.addEventListener("click", () => {
      this.state = { ...this.state, zoom: 1, pan: { x: 0, y: 0 } };
      this.renderOverlayNow();
    });
    zoomBar.append(zoomIn, zoomOut, resetView);

    this.overlayHost = el(doc, "div", { id: "overlay" });
    this.attachPan(this.overlayHost);
    this.conflictHost = el(doc, "div", { id: "conflicts" });
    this.metricsHost = el(doc, "dl", { id: "metrics" });
    this.exportHost = el(doc, "div", { id: "exports", hidden: "" });
    for (const kind of EXPORT_KINDS) {
      this.exportHost.appendChild(
        el(doc, "a", { "data-kind": kind, download: kind, href: "#" }, kind),
      );
    }
    return el(
      doc,
      "section",
      { id: "compare" },
      el(doc, "h2", {}, "comparison"),
      this.layerHost,
      this.compareButton,
      toggles,
      zoomBar,
      this.overlayHost,
      this.conflictHost,
      this.metricsHost,
      this.exportHost,
    );
  }

  private buildAnalyzeSection(): HTMLElement {
    const doc = this.doc;
    const form = el(doc, "div", { id: "params" });
    for (const [key, hint] of PARAM_FIELDS) {
      const input = el(doc, "input", {
        type: "number",
        step: "any",
        name: key,
        id: `param-${key}`,
        title: hint,
      });
      form.append(
        el(doc, "label", { for: `param-${key}`, title: hint }, key),
        input,
      );
    }
    this.persistBox = el(doc, "input", { type: "checkbox", id: "persist" });
    this.analyzeButton = el(
      doc,
      "button",
      { type: "button", id: "analyze-btn", class: "mutating" },
      "analyze",
    );
    this.analyzeButton.addEventListener("click", () => {
      void this.onAnalyze();
    });
    this.reportHost = el(doc, "div", { id: "report" });
    return el(
      doc,
      "section",
      { id: "analyze" },
      el(doc, "h2", {}, "renew vs new"),
      form,
      el(doc, "label", { for: "persist" }, this.persistBox, "keep overrides"),
      this.analyzeButton,
      this.reportHost,
    );
  }

  // --------------------------------------------------------------- actions

  private async ensureSession(): Promise<string> {
    const existing = this.state.sessionId;
    if (existing !== null) {
      return existing;
    }
    const id = await this.api.createSession();
    this.state = { ...this.state, sessionId: id };
    for (const a of this.exportHost.querySelectorAll<HTMLAnchorElement>("a")) {
      const kind = a.dataset["kind"] as ExportKind;
      a.href = this.api.exportUrl(id, kind);
    }
    return id;
  }

  private async onBoardFile(role: BoardRole, input: HTMLInputElement): Promise<void> {
    const file = input.files?.[0];
    if (!file) {
      return;
    }
    const content = await file.text();
    await this.loadBoard(role, content);
  }

  /** Upload one board's file content. The file inputs funnel through
   * here; so can drag-and-drop or tests. */
  async loadBoard(role: BoardRole, content: string): Promise<void> {
    await this.withBusy(async () => {
      const id = await this.ensureSession();
      const summary = await this.api.uploadBoard(id, role, content);
      this.applySummary(role, summary);
      this.showStatus(`${role} board loaded`);
    });
  }

  /** Board replacement voids the server-side transform and plan, so the
   * derived client state goes with it. */
  private applySummary(role: BoardRole, summary: BoardSummary): void {
    this.summaries[role] = summary;
    this.picker.setSummary(role, summary);
    this.lastCompare = null;
    this.transformEl.textContent = "";
    this.exportHost.hidden = true;
    this.renderOverlayNow();
    this.renderConflicts([]);
    this.metricsHost.replaceChildren();

    const host = this.summaryEls[role];
    host.replaceChildren();
    const doc = this.doc;
    host.append(
      el(
        doc,
        "span",
        { class: "facts" },
        `${summary.layers.join(", ")} | bbox ${summary.bbox.join(", ")} | ` +
          `${String(summary.netCount)} nets`,
      ),
    );
    for (const diag of summary.diagnostics ?? []) {
      host.append(
        el(
          doc,
          "span",
          { class: `diag ${diag.severity}` },
          `line ${String(diag.line)}: ${diag.message}`,
        ),
      );
    }
    const select = this.footprintSelects[role];
    select.replaceChildren(el(doc, "option", { value: "" }, "footprint..."));
    for (const ref of summary.footprintRefs) {
      select.appendChild(el(doc, "option", { value: ref }, ref));
    }
    if (role === "old") {
      this.rebuildLayerBoxes(summary.layers);
    }
    this.refreshPicks();
  }

  private rebuildLayerBoxes(layers: string[]): void {
    this.layerHost.replaceChildren();
    this.state = { ...this.state, visibleLayers: [...layers] };
    for (const layer of layers) {
      const box = el(this.doc, "input", {
        type: "checkbox",
        "data-layer": layer,
        id: `layer-${layer}`,
      });
      box.checked = true;
      this.layerHost.append(
        el(this.doc, "label", { for: `layer-${layer}` }, box, layer),
      );
    }
  }

  private selectedLayers(): string[] {
    const boxes =
      this.layerHost.querySelectorAll<HTMLInputElement>("input[data-layer]");
    return [...boxes].filter((b) => b.checked).map((b) => b.dataset["layer"] as string);
  }

  private refreshPicks(): void {
    for (const role of ROLES) {
      const pick = this.picker.describe(role);
      this.pickEls[role].textContent = pick ?? "";
    }
    this.alignButton.disabled = this.busy || this.picker.spec() === null;
  }

  private async onAlign(): Promise<void> {
    const spec = this.picker.spec();
    if (spec === null) {
      return;
    }
    await this.withBusy(async () => {
      const id = await this.ensureSession();
      const t = await this.api.align(id, spec);
      this.transformEl.textContent =
        `dx ${String(t.dx)}, dy ${String(t.dy)}, rotation ${String(t.rotation)}`;
      this.showStatus("aligned");
      if (this.summaries.old && this.summaries.new) {
        await this.compareNow();
      }
    });
  }

  private async compareNow(): Promise<void> {
    const id = await this.ensureSession();
    const layers = this.selectedLayers();
    if (this.layerHost.childElementCount > 0 && layers.length === 0) {
      this.showStatus("select at least one layer", true);
      return;
    }
    const payload = await this.api.compare(
      id,
      layers.length > 0 ? layers : undefined,
    );
    this.lastCompare = payload;
    this.state = { ...this.state, visibleLayers: payload.layers };
    this.transformEl.textContent =
      `dx ${String(payload.transform.dx)}, dy ${String(payload.transform.dy)}, ` +
      `rotation ${String(payload.transform.rotation)}`;
    this.renderOverlayNow();
    this.renderConflicts(payload.conflicts.messages);
    this.renderMetrics(payload.metrics);
    this.exportHost.hidden = false;
    this.showStatus(
      payload.conflicts.messages.length > 0
        ? "comparison done, with conflicts"
        : "comparison done",
    );
  }

  private async onAnalyze(): Promise<void> {
    const overrides = this.collectOverrides();
    if (overrides === null) {
      return;
    }
    await this.withBusy(async () => {
      const id = await this.ensureSession();
      const report = await this.api.analyze(id, overrides, this.persistBox.checked);
      this.state = { ...this.state, lastReport: report, paramValues: overrides };
      this.renderReport();
      this.showStatus("analysis done");
    });
  }

  private collectOverrides(): Record<string, number> | null {
    const overrides: Record<string, number> = {};
    const inputs = this.root.querySelectorAll<HTMLInputElement>("#params input");
    for (const input of inputs) {
      const raw = input.value.trim();
      if (raw === "") {
        continue;
      }
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        this.showStatus(`parameter ${input.name} must be a number`, true);
        return null;
      }
      overrides[input.name] = value;
    }
    return overrides;
  }

  // ------------------------------------------------------------- rendering

  private renderOverlayNow(): void {
    this.overlayHost.replaceChildren();
    if (this.lastCompare !== null) {
      this.overlayHost.appendChild(
        renderOverlay(this.lastCompare, this.state, this.doc),
      );
    }
  }

  private renderConflicts(messages: string[]): void {
    this.conflictHost.replaceChildren();
    for (const message of messages) {
      this.conflictHost.appendChild(
        el(this.doc, "p", { class: "conflict-message" }, message),
      );
    }
  }

  private renderMetrics(metrics: Record<string, number>): void {
    this.metricsHost.replaceChildren();
    for (const [key, value] of Object.entries(metrics)) {
      this.metricsHost.append(
        el(this.doc, "dt", {}, key),
        el(this.doc, "dd", { "data-metric": key }, String(value)),
      );
    }
  }

  private renderReport(): void {
    this.reportHost.replaceChildren();
    const report = this.state.lastReport;
    if (report === null) {
      return;
    }
    this.reportHost.append(
      renderReportTable(report, this.doc),
      renderVerdict(report, this.doc),
      renderRadarChart(report, this.doc),
    );
    if (report.notes.length > 0) {
      this.reportHost.appendChild(renderNotes(report, this.doc));
    }
  }

  private attachPan(host: HTMLElement): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    host.addEventListener("pointerdown", (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
    });
    host.addEventListener("pointermove", (ev) => {
      if (!dragging) {
        return;
      }
      const svg = host.querySelector("svg");
      // client px to board units via the rendered viewBox scale
      const width = svg?.viewBox.baseVal.width ?? 0;
      const client = host.clientWidth;
      if (!svg || width === 0 || client === 0) {
        return;
      }
      const scale = width / client;
      this.state = {
        ...this.state,
        pan: {
          x: this.state.pan.x + (ev.clientX - lastX) * scale,
          y: this.state.pan.y - (ev.clientY - lastY) * scale,
        },
      };
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.renderOverlayNow();
    });
    const stop = () => {
      dragging = false;
    };
    host.addEventListener("pointerup", stop);
    host.addEventListener("pointerleave", stop);
  }

  // --------------------------------------------------------------- helpers

  private showStatus(text: string, isError = false): void {
    this.statusEl.textContent = text;
    this.statusEl.classList.toggle("error", isError);
  }

  /** Settles once the in-flight mutating request (if any) has finished;
   * lets callers outside a click handler wait for quiescence. */
  idle(): Promise<void> {
    return this.pending;
  }

  private pending: Promise<void> = Promise.resolve();

  private async withBusy(fn: () => Promise<void>): Promise<void> {
    if (this.busy) {
      return;
    }
    this.setBusy(true);
    const run = (async () => {
      try {
        await fn();
      } catch (exc) {
        this.showStatus(formatError(exc), true);
      } finally {
        this.setBusy(false);
      }
    })();
    this.pending = run;
    await run;
  }

  private setBusy(busy: boolean): void {
    this.busy = busy;
    const controls = this.root.querySelectorAll<
      HTMLButtonElement | HTMLInputElement | HTMLSelectElement
    >(".mutating");
    for (const control of controls) {
      control.disabled = busy;
    }
    if (!busy) {
      this.refreshPicks();
    }
  }
}

const bootHost =
  typeof document === "undefined" ? null : document.getElementById("app");
if (bootHost) {
  new App(bootHost, new ApiClient());
}
