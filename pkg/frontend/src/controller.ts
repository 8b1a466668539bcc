/** Orchestrates the session against the service: loading, live overlay
 *  previews and calibration commits.
 *
 *  At most one overlay request is in flight; newer slider states supersede
 *  a pending one. On a server error the last good composite is kept and a
 *  warning is surfaced instead.
 */

import { ApiClient, ApiError } from "./api.js";
import { debounce } from "./debounce.js";
import {
  InspectorSession,
  afterCommit,
  composeRig,
  createSession,
  isDirty,
  overlayPayload,
} from "./session.js";

export interface ControllerView {
  renderComposite(png: ArrayBuffer): void;
  showError(message: string): void;
  showWarning(message: string): void;
  clearMessages(): void;
  sessionChanged(session: InspectorSession, dirty: boolean): void;
}

export const PREVIEW_DEBOUNCE_MS = 100;

export class InspectorController {
  session: InspectorSession | null = null;
  lastComposite: ArrayBuffer | null = null;

  private inFlight = false;
  private pendingRefresh = false;
  private readonly debouncedPreview: (() => void) & { cancel(): void };

  constructor(
    private readonly api: ApiClient,
    private readonly view: ControllerView,
    debounceMs: number = PREVIEW_DEBOUNCE_MS,
  ) {
    this.debouncedPreview = debounce(() => void this.previewNow(), debounceMs);
  }

  /** Fetch calibration and frames; deltas start zeroed. */
  async load(): Promise<void> {
    try {
      const [rig, frames] = await Promise.all([this.api.getCalibration(), this.api.getFrames()]);
      this.session = createSession(rig, frames);
      this.view.clearMessages();
      this.notify();
      if (frames.length === 0) {
        this.view.showWarning("no capture frames in the workspace; controls disabled");
      } else {
        await this.previewNow();
      }
    } catch (err) {
      this.session = null;
      this.view.showError(`failed to load session: ${(err as Error).message}`);
      throw err;
    }
  }

  /** Apply a session update and schedule a debounced preview. */
  update(mutate: (session: InspectorSession) => InspectorSession): void {
    if (!this.session) return;
    this.session = mutate(this.session);
    this.notify();
    this.debouncedPreview();
  }

  /** Issue the overlay request for the current state immediately. */
  async previewNow(): Promise<void> {
    if (!this.session || this.session.frameId === null) return;
    if (this.inFlight) {
      this.pendingRefresh = true;
      return;
    }
    this.inFlight = true;
    const payload = overlayPayload(this.session);
    try {
      const png = await this.api.postOverlay(payload);
      this.lastComposite = png;
      this.view.renderComposite(png);
      this.view.clearMessages();
    } catch (err) {
      // Keep the last good image; just warn.
      this.view.showWarning(`overlay failed, showing last good image: ${(err as Error).message}`);
    } finally {
      this.inFlight = false;
    }
    if (this.pendingRefresh) {
      this.pendingRefresh = false;
      await this.previewNow();
    }
  }

  /** POST rig (+) deltas to the accept endpoint; on success the committed
   *  rig becomes the session baseline and the sliders reset. */
  async commit(): Promise<void> {
    if (!this.session) throw new Error("session not loaded");
    if (!isDirty(this.session)) {
      this.view.showWarning("no delta changes to commit");
      return;
    }
    const rig = composeRig(this.session);
    try {
      await this.api.acceptCalibration(rig);
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : String(err);
      this.view.showError(`commit rejected: ${detail}`);
      return; // state unchanged, still dirty
    }
    const fresh = await this.api.getCalibration();
    this.session = afterCommit(this.session, fresh);
    this.view.clearMessages();
    this.notify();
    await this.previewNow();
  }

  dispose(): void {
    this.debouncedPreview.cancel();
  }

  private notify(): void {
    if (this.session) this.view.sessionChanged(this.session, isDirty(this.session));
  }
}
