import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatController } from "../src/chat.js";
import { DIRICHLET_COLOR, NEUMANN_COLOR } from "../src/meshView.js";
import { scriptedFetch, squareMesh } from "./fixtures.js";

const GEO = "Point(1) = {0, 0, 0, 0.1};";

function turnOk() {
  return {
    json: {
      geo_text: GEO,
      mesh: squareMesh(),
      transcript: [
        { role: "system", content: "…" },
        { role: "user", content: "a plate" },
        { role: "assistant", content: "```\n" + GEO + "\n```" },
      ],
    },
  };
}

describe("ChatController", () => {
  it("creates a session lazily and renders the returned mesh", async () => {
    const { fetch, calls } = scriptedFetch([
      (c) => (c.url === "/sessions" ? { status: 201, json: { id: "s1" } } : undefined),
      (c) => (c.url === "/sessions/s1/turn" ? turnOk() : undefined),
    ]);
    const chat = new ChatController(new ApiClient("", fetch));
    await chat.sendTurn("a plate", 2, 0.1);
    expect(calls.map((c) => c.url)).toEqual(["/sessions", "/sessions/s1/turn"]);
    expect(calls[1].body).toEqual({ text: "a plate", dim: 2, lc: 0.1 });
    expect(chat.banner).toBeNull();
    expect(chat.geoText).toBe(GEO);
    expect(chat.meshRevision).toBe(1);
    // preview carries the boundary coloring convention
    const colors = chat.preview!.boundary.map((b) => b.color);
    expect(colors).toContain(DIRICHLET_COLOR);
    expect(colors).toContain(NEUMANN_COLOR);
  });

  it("replaces the preview on a follow-up turn", async () => {
    const { fetch } = scriptedFetch([
      (c) => (c.url === "/sessions" ? { status: 201, json: { id: "s1" } } : undefined),
      (c) => (c.url === "/sessions/s1/turn" ? turnOk() : undefined),
    ]);
    const chat = new ChatController(new ApiClient("", fetch));
    await chat.sendTurn("a plate", 2, 0.1);
    await chat.sendTurn("increase elements", 2, 0.05);
    expect(chat.meshRevision).toBe(2);
  });

  it("keeps the transcript and shows a banner on a 502", async () => {
    let fail = false;
    const { fetch } = scriptedFetch([
      (c) => (c.url === "/sessions" ? { status: 201, json: { id: "s1" } } : undefined),
      (c) => {
        if (c.url !== "/sessions/s1/turn") return undefined;
        if (fail) return { status: 502, json: { detail: "retry budget exhausted" } };
        return turnOk();
      },
    ]);
    const chat = new ChatController(new ApiClient("", fetch));
    await chat.sendTurn("a plate", 2, 0.1);
    const goodRevision = chat.meshRevision;
    fail = true;
    await chat.sendTurn("something impossible", 2, 0.1);
    expect(chat.banner).toBe("retry budget exhausted");
    // the failing user message is still visible, the preview untouched
    expect(chat.transcript[chat.transcript.length - 1]).toEqual({
      role: "user",
      content: "something impossible",
    });
    expect(chat.meshRevision).toBe(goodRevision);
    expect(chat.preview).not.toBeNull();
  });
});
