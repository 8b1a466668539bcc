import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { ControllerView, InspectorController } from "../src/controller.js";
import { selectChannels, setDelta } from "../src/session.js";
import { OverlayRequest, RigJson } from "../src/types.js";

function demoRig(tx = 0.025): RigJson {
  const sensor = (t: number[]) => ({
    fx: 220, fy: 220, cx: 79.5, cy: 79.5, dist: [0, 0, 0, 0, 0],
    R: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], t, width: 160, height: 160,
  });
  return {
    reference_id: "nir_left",
    baseline_m: 0.05,
    nir_left: sensor([0, 0, 0]),
    nir_right: sensor([-0.05, 0, 0]),
    rgb: sensor([tx, 0.015, 0]),
  };
}

class FakeView implements ControllerView {
  rendered: ArrayBuffer[] = [];
  errors: string[] = [];
  warnings: string[] = [];
  renderComposite(png: ArrayBuffer) { this.rendered.push(png); }
  showError(message: string) { this.errors.push(message); }
  showWarning(message: string) { this.warnings.push(message); }
  clearMessages() {}
  sessionChanged() {}
}

interface FakeApiOptions {
  down?: boolean;
  overlayFails?: boolean;
  rejectAccept?: boolean;
  slowOverlay?: boolean;
  noFrames?: boolean;
}

class FakeApi {
  rig = demoRig();
  overlayCalls: OverlayRequest[] = [];
  acceptCalls: RigJson[] = [];
  private resolvers: ((png: ArrayBuffer) => void)[] = [];

  constructor(public opts: FakeApiOptions = {}) {}

  async getCalibration(): Promise<RigJson> {
    if (this.opts.down) throw new ApiError("service unreachable: connect ECONNREFUSED");
    return structuredClone(this.rig);
  }

  async getFrames(): Promise<string[]> {
    return this.opts.noFrames ? [] : ["frame_000"];
  }

  channelImageUrl(): string { return ""; }

  async postOverlay(req: OverlayRequest): Promise<ArrayBuffer> {
    this.overlayCalls.push(structuredClone(req));
    if (this.opts.overlayFails) throw new ApiError("boom", 500);
    if (this.opts.slowOverlay) {
      return new Promise((resolve) => this.resolvers.push(resolve));
    }
    return new TextEncoder().encode(JSON.stringify(req)).buffer as ArrayBuffer;
  }

  releaseOverlay(): void {
    const resolve = this.resolvers.shift();
    if (resolve) resolve(new TextEncoder().encode("png").buffer as ArrayBuffer);
  }

  async acceptCalibration(rig: RigJson): Promise<{ status: string; rig_hash: string }> {
    if (this.opts.rejectAccept) throw new ApiError("invalid rig: bad rotation", 422);
    this.acceptCalls.push(structuredClone(rig));
    this.rig = structuredClone(rig);
    return { status: "accepted", rig_hash: "deadbeef" };
  }
}

function makeController(opts: FakeApiOptions = {}) {
  const api = new FakeApi(opts);
  const view = new FakeView();
  // Debounce of 0 keeps the unit tests synchronous-ish.
  const controller = new InspectorController(api as never, view, 0);
  return { api, view, controller };
}

async function until(cond: () => boolean, timeoutMs = 2000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) throw new Error("condition never held");
    await new Promise((r) => setTimeout(r, 5));
  }
}

describe("load", () => {
  it("initialises the session and renders a first composite", async () => {
    const { controller, view, api } = makeController();
    await controller.load();
    expect(controller.session?.frameId).toBe("frame_000");
    expect(api.overlayCalls.length).toBe(1);
    expect(view.rendered.length).toBe(1);
  });

  it("service down surfaces an error and leaves no session", async () => {
    const { controller, view } = makeController({ down: true });
    await expect(controller.load()).rejects.toThrow();
    expect(controller.session).toBeNull();
    expect(view.errors.length).toBe(1);
    expect(view.errors[0]).toMatch(/failed to load/);
  });

  it("an empty frame list loads but warns and requests no overlay", async () => {
    const { controller, view, api } = makeController({ noFrames: true });
    await controller.load();
    expect(controller.session?.frameId).toBeNull();
    expect(view.warnings.some((w) => w.includes("no capture frames"))).toBe(true);
    expect(api.overlayCalls.length).toBe(0);
  });
});

describe("preview", () => {
  it("keeps the last good composite when the server errors", async () => {
    const { controller, view, api } = makeController();
    await controller.load();
    const lastGood = controller.lastComposite;
    api.opts.overlayFails = true;
    await controller.previewNow();
    expect(controller.lastComposite).toBe(lastGood);
    expect(view.warnings.some((w) => w.includes("last good image"))).toBe(true);
  });

  it("supersedes a pending request instead of stacking them", async () => {
    const { controller, api } = makeController({ slowOverlay: true });
    const loading = controller.load();
    await until(() => api.overlayCalls.length === 1);
    const p1 = controller.previewNow();
    const p2 = controller.previewNow();
    expect(api.overlayCalls.length).toBe(1);
    api.releaseOverlay();
    await until(() => api.overlayCalls.length === 2);
    api.releaseOverlay();
    await Promise.all([p1, p2, loading]);
    // the two extra calls collapsed into a single refresh
    expect(api.overlayCalls.length).toBe(2);
  });
});

describe("commit", () => {
  it("posts rig with deltas applied, then resets to the fresh baseline", async () => {
    const { controller, api } = makeController();
    await controller.load();
    controller.update((s) => selectChannels(s, "nir_left", "rgb"));
    controller.update((s) => setDelta(s, "tx", 10));
    await controller.commit();
    expect(api.acceptCalls.length).toBe(1);
    const posted = api.acceptCalls[0];
    expect((posted.rgb as { t: number[] }).t[0]).toBeCloseTo(0.035, 12);
    expect(controller.session && controller.session.deltas.tx).toBe(0);
  });

  it("no-ops with a warning when nothing is dirty", async () => {
    const { controller, api, view } = makeController();
    await controller.load();
    await controller.commit();
    expect(api.acceptCalls.length).toBe(0);
    expect(view.warnings.some((w) => w.includes("no delta changes"))).toBe(true);
  });

  it("a rejected commit shows the detail and keeps the dirty state", async () => {
    const { controller, view } = makeController({ rejectAccept: true });
    await controller.load();
    controller.update((s) => setDelta(s, "tx", 10));
    await controller.commit();
    expect(view.errors.some((e) => e.includes("invalid rig"))).toBe(true);
    expect(controller.session?.deltas.tx).toBe(10);
  });
});
