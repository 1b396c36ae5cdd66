import { afterEach, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import { ApiClient } from "../src/api.js";
import { boardSummary, comparePayload, report } from "./fixtures.js";

interface Call {
  path: string;
  method: string;
  body: string | undefined;
}

type Responder = (call: Call) => { status: number; body: string } | null;

/** App wired to a scripted transport. `extra` may claim a call before the
 * default routes answer it. */
function makeApp(extra: Responder = () => null) {
  const calls: Call[] = [];
  const api = new ApiClient("", async (input, init) => {
    const call: Call = {
      path: input,
      method: init?.method ?? "GET",
      body: init?.body as string | undefined,
    };
    calls.push(call);
    const scripted = extra(call);
    const { status, body } = scripted ?? route(call);
    return {
      ok: status >= 200 && status < 300,
      status,
      text: async () => body,
    } as unknown as Response;
  });
  const container = document.createElement("div");
  document.body.appendChild(container);
  const app = new App(container, api);
  return { app, container, calls };
}

function route(call: Call): { status: number; body: string } {
  const ok = (value: unknown) => ({ status: 200, body: JSON.stringify(value) });
  if (call.path === "/session") {
    return ok({ id: "s1" });
  }
  if (/\/board\/(old|new)$/.test(call.path)) {
    return ok(boardSummary());
  }
  if (call.path.endsWith("/align")) {
    return ok({ dx: 10.5, dy: -3.25, rotation: 90 });
  }
  if (call.path.endsWith("/compare")) {
    return ok(comparePayload());
  }
  if (call.path.endsWith("/analyze")) {
    return ok(report());
  }
  throw new Error(`unrouted request: ${call.method} ${call.path}`);
}

function click(container: HTMLElement, selector: string): void {
  const target = container.querySelector<HTMLElement>(selector);
  expect(target, selector).not.toBeNull();
  target!.click();
}

async function loadBothBoards(app: App): Promise<void> {
  await app.loadBoard("old", "OLD-BYTES");
  await app.loadBoard("new", "NEW-BYTES");
}

afterEach(() => {
  document.body.replaceChildren();
});

describe("board loading", () => {
  it("uploads raw content against a lazily created session", async () => {
    const { app, container, calls } = makeApp();
    await app.loadBoard("old", "OLD-BYTES");
    expect(calls.map((c) => c.path)).toEqual([
      "/session",
      "/session/s1/board/old",
    ]);
    expect(calls[1]!.body).toBe("OLD-BYTES");
    const summary = container.querySelector('[data-role="old"] .board-summary')!;
    expect(summary.textContent).toContain("F.Cu, B.Cu");
    expect(summary.textContent).toContain("3 nets");
  });

  it("populates layer checkboxes from the old board", async () => {
    const { app, container } = makeApp();
    await app.loadBoard("old", "OLD-BYTES");
    const boxes = container.querySelectorAll("#layers input[data-layer]");
    expect([...boxes].map((b) => b.getAttribute("data-layer"))).toEqual([
      "F.Cu",
      "B.Cu",
    ]);
  });

  it("surfaces parse failures in the status line", async () => {
    const { app, container } = makeApp((call) =>
      call.path.endsWith("/board/old")
        ? {
            status: 422,
            body: JSON.stringify({
              detail: { message: "line 2: unbalanced", diagnostics: [{}] },
            }),
          }
        : null,
    );
    await app.loadBoard("old", "(");
    const status = container.querySelector("#status")!;
    expect(status.textContent).toContain("line 2: unbalanced");
    expect(status.classList.contains("error")).toBe(true);
  });
});

describe("alignment picking", () => {
  it("emits the exact bbox-corner spec and re-compares", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);

    click(container, 'button[data-role="old"][data-corner="BL"]');
    click(container, 'button[data-role="new"][data-corner="BL"]');
    const alignBtn = container.querySelector<HTMLButtonElement>("#align-btn")!;
    expect(alignBtn.disabled).toBe(false);
    alignBtn.click();
    await app.idle();

    const alignCall = calls.find((c) => c.path.endsWith("/align"))!;
    expect(alignCall.body).toBe('{"mode":"bboxCorner","corner":"BL"}');
    expect(calls.some((c) => c.path.endsWith("/compare"))).toBe(true);
    expect(container.querySelector("#transform")!.textContent).toBe(
      "dx 10.5, dy -3.25, rotation 90",
    );
  });

  it("emits the exact footprint-center spec", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);

    for (const role of ["old", "new"] as const) {
      const select = container.querySelector<HTMLSelectElement>(
        `select[data-role="${role}"]`,
      )!;
      select.value = "U1";
      select.dispatchEvent(new Event("change", { bubbles: true }));
    }
    click(container, "#align-btn");
    await app.idle();

    const alignCall = calls.find((c) => c.path.endsWith("/align"))!;
    expect(alignCall.body).toBe(
      '{"mode":"footprintCenter","refOld":"U1","refNew":"U1"}',
    );
  });

  it("keeps align disabled for mismatched corners", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);
    click(container, 'button[data-role="old"][data-corner="BL"]');
    click(container, 'button[data-role="new"][data-corner="TR"]');
    const alignBtn = container.querySelector<HTMLButtonElement>("#align-btn")!;
    expect(alignBtn.disabled).toBe(true);
    alignBtn.click();
    await app.idle();
    expect(calls.some((c) => c.path.endsWith("/align"))).toBe(false);
  });
});

describe("comparison", () => {
  it("renders overlay, conflicts, and metrics from the payload", async () => {
    const { app, container } = makeApp();
    await loadBothBoards(app);
    click(container, "#compare-btn");
    await app.idle();

    const conflictGroup = container.querySelector(
      '#overlay g[data-overlay="conflicts"]',
    )!;
    expect(conflictGroup).not.toBeNull();
    expect(conflictGroup.querySelector("path")!.getAttribute("fill")).toBe(
      "#ffd33d",
    );
    expect(container.querySelector("#conflicts")!.textContent).toContain(
      "drill-out at (15, 10) overlaps new copper",
    );
    const groove = container.querySelector('dd[data-metric="grooveArea"]')!;
    expect(groove.textContent).toBe(String(comparePayload().metrics["grooveArea"]));
    const exports = container.querySelector<HTMLElement>("#exports")!;
    expect(exports.hidden).toBe(false);
    const link = exports.querySelector<HTMLAnchorElement>(
      'a[data-kind="plan.json"]',
    )!;
    expect(link.getAttribute("href")).toBe("/session/s1/export/plan.json");
  });

  it("requests only the checked layers", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);
    const box = container.querySelector<HTMLInputElement>(
      'input[data-layer="B.Cu"]',
    )!;
    box.checked = false;
    click(container, "#compare-btn");
    await app.idle();
    const compareCall = calls.find((c) => c.path.endsWith("/compare"))!;
    expect(compareCall.body).toBe('{"layers":["F.Cu"]}');
  });

  it("overlay toggles hide exactly one layer and are idempotent", async () => {
    const { app, container } = makeApp();
    await loadBothBoards(app);
    click(container, "#compare-btn");
    await app.idle();

    const names = () =>
      [...container.querySelectorAll("#overlay g[data-overlay]")].map((g) =>
        g.getAttribute("data-overlay"),
      );
    const before = names();
    click(container, "#toggle-deposit");
    expect(names()).toEqual(before.filter((n) => n !== "deposit"));
    click(container, "#toggle-deposit");
    expect(names()).toEqual(before);
  });
});

describe("what-if analysis", () => {
  it("round-trips overrides through the service and displays its values verbatim", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);
    click(container, "#compare-btn");
    await app.idle();

    const rho = container.querySelector<HTMLInputElement>("#param-rho_e")!;
    rho.value = "8";
    click(container, "#analyze-btn");
    await app.idle();

    const analyzeCall = calls.find((c) => c.path.endsWith("/analyze"))!;
    expect(analyzeCall.body).toBe('{"overrides":{"rho_e":8}}');

    const fixture = report();
    const table = container.querySelector("#report table")!;
    for (const field of [
      "epoxyMass",
      "stencilArea",
      "fr4AreaSaved",
      "costDelta",
      "timeNew",
      "timeDelta",
      "energyDelta",
    ] as const) {
      const cell = table.querySelector(`tr[data-field="${field}"] td.value`)!;
      expect(cell.textContent).toBe(String(fixture[field]));
    }
    // every request stayed on the session API; nothing was computed locally
    expect(calls.every((c) => c.path.startsWith("/session"))).toBe(true);
  });

  it("includes persist only when requested", async () => {
    const { app, container, calls } = makeApp();
    await loadBothBoards(app);
    click(container, "#compare-btn");
    await app.idle();

    container.querySelector<HTMLInputElement>("#persist")!.checked = true;
    const dzT = container.querySelector<HTMLInputElement>("#param-dz_t")!;
    dzT.value = "0.2";
    click(container, "#analyze-btn");
    await app.idle();
    const analyzeCall = calls.find((c) => c.path.endsWith("/analyze"))!;
    expect(analyzeCall.body).toBe('{"overrides":{"dz_t":0.2},"persist":true}');
  });

  it("shows a verdict that flips with the sign of the cost delta", async () => {
    const cheaper = makeApp();
    await loadBothBoards(cheaper.app);
    click(cheaper.container, "#compare-btn");
    await cheaper.app.idle();
    click(cheaper.container, "#analyze-btn");
    await cheaper.app.idle();
    const verdict = cheaper.container.querySelector(".verdict")!;
    expect(verdict.getAttribute("data-favors-renewal")).toBe("true");

    const pricier = makeApp((call) =>
      call.path.endsWith("/analyze")
        ? { status: 200, body: JSON.stringify(report({ costDelta: 4.5 })) }
        : null,
    );
    await loadBothBoards(pricier.app);
    click(pricier.container, "#compare-btn");
    await pricier.app.idle();
    click(pricier.container, "#analyze-btn");
    await pricier.app.idle();
    const flipped = pricier.container.querySelector(".verdict")!;
    expect(flipped.getAttribute("data-favors-renewal")).toBe("false");
  });
});

describe("request serialization", () => {
  it("disables mutating controls while a request is pending", async () => {
    const { app, container, release } = makeAppWithSlowCompare();
    await loadBothBoards(app);
    click(container, "#compare-btn");
    const compareBtn = container.querySelector<HTMLButtonElement>("#compare-btn")!;
    const analyzeBtn = container.querySelector<HTMLButtonElement>("#analyze-btn")!;
    const fileInput = container.querySelector<HTMLInputElement>("#board-file-old")!;
    expect(compareBtn.disabled).toBe(true);
    expect(analyzeBtn.disabled).toBe(true);
    expect(fileInput.disabled).toBe(true);
    release();
    await app.idle();
    expect(compareBtn.disabled).toBe(false);
    expect(analyzeBtn.disabled).toBe(false);
    expect(fileInput.disabled).toBe(false);
  });
});

function makeAppWithSlowCompare() {
  let release!: () => void;
  const gate = new Promise<void>((resolve) => {
    release = resolve;
  });
  const api = new ApiClient("", async (input, init) => {
    const call: Call = {
      path: input,
      method: init?.method ?? "GET",
      body: init?.body as string | undefined,
    };
    if (call.path.endsWith("/compare")) {
      await gate;
    }
    const { status, body } = route(call);
    return {
      ok: status >= 200 && status < 300,
      status,
      text: async () => body,
    } as unknown as Response;
  });
  const container = document.createElement("div");
  document.body.appendChild(container);
  const app = new App(container, api);
  return { app, container, release };
}
