/** Typed client for the inspector service. Only acceptCalibration mutates
 *  server state; postOverlay is a query carried over POST for its body.
 */

import { OverlayRequest, RigJson } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await fetch(this.url(path), init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, resp.status);
    }
    return resp;
  }

  async getCalibration(): Promise<RigJson> {
    return (await this.request("/api/calibration")).json();
  }

  async getFrames(): Promise<string[]> {
    const body = await (await this.request("/api/frames")).json();
    return body.frames as string[];
  }

  channelImageUrl(frameId: string, channel: string): string {
    return this.url(`/api/frame/${frameId}/channel/${channel}`);
  }

  async postOverlay(req: OverlayRequest): Promise<ArrayBuffer> {
    const resp = await this.request("/api/overlay", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    return resp.arrayBuffer();
  }

  async acceptCalibration(rig: RigJson): Promise<{ status: string; rig_hash: string }> {
    const resp = await this.request("/api/calibration/accept", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(rig),
    });
    return resp.json();
  }
}
