/** Geometry chat controller.
 *
 * Each turn POSTs the user's text and, on success, replaces the mesh
 * preview with the returned revision. Failures (mesher diagnostics
 * exhausted, backend down) surface as a banner while the transcript is
 * preserved so the user can rephrase.
 */

import { ApiClient, ApiError } from "./api.js";
import { buildRenderModel, RenderModel } from "./meshView.js";
import type { ChatMessage, MeshPayload } from "./types.js";

export class ChatController {
  sessionId: string | null = null;
  transcript: ChatMessage[] = [];
  geoText: string | null = null;
  mesh: MeshPayload | null = null;
  preview: RenderModel | null = null;
  /** error banner text; null when the last turn succeeded */
  banner: string | null = null;
  /** bumped every time the preview is replaced */
  meshRevision = 0;

  constructor(private readonly api: ApiClient) {}

  async ensureSession(): Promise<string> {
    if (this.sessionId === null) {
      this.sessionId = (await this.api.newSession()).id;
    }
    return this.sessionId;
  }

  async sendTurn(text: string, dim: number, lc: number): Promise<void> {
    const id = await this.ensureSession();
    // echo the user's message immediately; a failed turn keeps it visible
    this.transcript = [...this.transcript, { role: "user", content: text }];
    try {
      const res = await this.api.chatTurn(id, text, dim, lc);
      this.transcript = res.transcript;
      this.geoText = res.geo_text;
      this.mesh = res.mesh;
      this.preview = buildRenderModel(res.mesh);
      this.meshRevision++;
      this.banner = null;
    } catch (err) {
      this.banner = err instanceof ApiError ? err.detail : String(err);
    }
  }
}
