/** DOM wiring for the inspector page. All state logic lives in session.ts
 *  and controller.ts; this file only binds widgets.
 */

import { ApiClient } from "./api.js";
import { ControllerView, InspectorController } from "./controller.js";
import { InspectorSession, selectChannels, selectFrame, setBlend, setDelta } from "./session.js";
import { DELTA_LIMITS, Deltas } from "./types.js";

const DELTA_KEYS: (keyof Deltas)[] = ["rx", "ry", "rz", "tx", "ty", "tz"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fillSelect(select: HTMLSelectElement, options: string[], value: string | null): void {
  select.innerHTML = "";
  for (const opt of options) {
    const o = document.createElement("option");
    o.value = opt;
    o.textContent = opt;
    select.appendChild(o);
  }
  if (value !== null) select.value = value;
}

class DomView implements ControllerView {
  private objectUrl: string | null = null;

  renderComposite(png: ArrayBuffer): void {
    const img = el<HTMLImageElement>("composite");
    if (this.objectUrl) URL.revokeObjectURL(this.objectUrl);
    this.objectUrl = URL.createObjectURL(new Blob([png], { type: "image/png" }));
    img.src = this.objectUrl;
  }

  showError(message: string): void {
    const banner = el<HTMLDivElement>("banner");
    banner.className = "banner error";
    banner.textContent = message;
    el<HTMLButtonElement>("retry").hidden = false;
  }

  showWarning(message: string): void {
    const banner = el<HTMLDivElement>("banner");
    banner.className = "banner warning";
    banner.textContent = message;
  }

  clearMessages(): void {
    const banner = el<HTMLDivElement>("banner");
    banner.className = "banner";
    banner.textContent = "";
    el<HTMLButtonElement>("retry").hidden = true;
  }

  sessionChanged(session: InspectorSession, dirty: boolean): void {
    fillSelect(el("frame"), session.frames, session.frameId);
    fillSelect(el("ref"), session.channels, session.refChannel);
    fillSelect(el("target"), session.channels, session.targetChannel);
    for (const key of DELTA_KEYS) {
      el<HTMLInputElement>(`delta-${key}`).value = String(session.deltas[key]);
      el<HTMLSpanElement>(`delta-${key}-value`).textContent =
        `${session.deltas[key].toFixed(1)} ${key.startsWith("r") ? "deg" : "mm"}`;
    }
    el<HTMLInputElement>("blend").value = String(session.blend);
    el<HTMLButtonElement>("commit").disabled = !dirty;
    const disabled = session.frameId === null;
    for (const id of ["frame", "ref", "target", "blend", ...DELTA_KEYS.map((k) => `delta-${k}`)]) {
      el<HTMLInputElement>(id).disabled = disabled && id !== "frame";
    }
  }
}

export function boot(baseUrl: string = ""): InspectorController {
  const api = new ApiClient(baseUrl || window.location.origin);
  const controller = new InspectorController(api, new DomView());

  for (const key of DELTA_KEYS) {
    const slider = el<HTMLInputElement>(`delta-${key}`);
    const limit = key.startsWith("r") ? DELTA_LIMITS.rotationDeg : DELTA_LIMITS.translationMm;
    slider.min = String(-limit);
    slider.max = String(limit);
    slider.step = "0.1";
    slider.addEventListener("input", () =>
      controller.update((s) => setDelta(s, key, Number(slider.value))),
    );
  }
  el<HTMLInputElement>("blend").addEventListener("input", (e) =>
    controller.update((s) => setBlend(s, Number((e.target as HTMLInputElement).value))),
  );
  el<HTMLSelectElement>("frame").addEventListener("change", (e) =>
    controller.update((s) => selectFrame(s, (e.target as HTMLSelectElement).value)),
  );
  const channelHandler = () =>
    controller.update((s) =>
      selectChannels(s, el<HTMLSelectElement>("ref").value, el<HTMLSelectElement>("target").value),
    );
  el<HTMLSelectElement>("ref").addEventListener("change", channelHandler);
  el<HTMLSelectElement>("target").addEventListener("change", channelHandler);
  el<HTMLButtonElement>("commit").addEventListener("click", () => void controller.commit());
  el<HTMLButtonElement>("retry").addEventListener("click", () => void controller.load());

  void controller.load();
  return controller;
}

if (typeof document !== "undefined" && document.getElementById("composite")) {
  boot();
}
