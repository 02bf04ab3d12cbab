import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { JobPoller, type Scheduler } from "../src/poller.js";
import type { JobState } from "../src/types.js";
import { scriptedFetch } from "./fixtures.js";

/** A scheduler the test drives by hand, one tick at a time. */
function manualScheduler(): { schedule: Scheduler; flush: () => Promise<void> } {
  const queue: (() => void)[] = [];
  return {
    schedule: (fn) => queue.push(fn),
    flush: async () => {
      const fns = queue.splice(0);
      fns.forEach((fn) => fn());
      // let the fired tick's fetch chain settle before returning
      await new Promise((r) => setTimeout(r, 0));
    },
  };
}

function jobApi(states: JobState[], histories: { epochs: number[]; losses: number[] }[]) {
  let stateIdx = 0;
  let histIdx = 0;
  const { fetch, calls } = scriptedFetch([
    (c) => {
      if (c.url === "/jobs/j1/history")
        return { json: histories[Math.min(histIdx++, histories.length - 1)] };
      if (c.url === "/jobs/j1/fields") return { json: { names: ["dem_u", "dem_magnitude"] } };
      if (c.url === "/jobs/j1")
        return { json: states[Math.min(stateIdx++, states.length - 1)] };
      return undefined;
    },
  ]);
  return { api: new ApiClient("", fetch), calls };
}

const running = (epoch: number): JobState => ({
  id: "j1",
  state: "running",
  epoch,
  loss: -epoch,
  error: null,
});
const done: JobState = { id: "j1", state: "done", epoch: 10, loss: -10, error: null };

describe("JobPoller", () => {
  it("accumulates history and fetches field names when the job finishes", async () => {
    const { api } = jobApi(
      [running(3), running(7), done],
      [
        { epochs: [0, 1, 2, 3], losses: [0, -1, -2, -3] },
        { epochs: [0, 1, 2, 3, 4, 5, 6, 7], losses: [0, -1, -2, -3, -4, -5, -6, -7] },
        { epochs: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10], losses: [0, -1, -2, -3, -4, -5, -6, -7, -8, -9, -10] },
      ],
    );
    const seen: string[] = [];
    let finished: string[] = [];
    const timer = manualScheduler();
    const poller = new JobPoller(
      api,
      "j1",
      {
        onState: (s) => seen.push(s.state),
        onFinished: (_s, names) => (finished = names),
      },
      1000,
      timer.schedule,
    );
    await poller.tick();
    await timer.flush();
    await timer.flush();
    expect(seen).toEqual(["running", "running", "done"]);
    expect(poller.series.epochs).toHaveLength(11);
    expect(finished).toEqual(["dem_u", "dem_magnitude"]);
  });

  it("never runs two polls concurrently", async () => {
    const { api, calls } = jobApi([running(1)], [{ epochs: [0], losses: [0] }]);
    const timer = manualScheduler();
    const poller = new JobPoller(api, "j1", {}, 1000, timer.schedule);
    // fire the same tick twice without awaiting: the second must no-op
    const first = poller.tick();
    const second = poller.tick();
    await Promise.all([first, second]);
    const stateCalls = calls.filter((c) => c.url === "/jobs/j1");
    expect(stateCalls).toHaveLength(1);
    poller.stop();
  });

  it("stops polling after stop() and after a terminal state", async () => {
    const { api, calls } = jobApi([done], [{ epochs: [0], losses: [0] }]);
    const timer = manualScheduler();
    const poller = new JobPoller(api, "j1", {}, 1000, timer.schedule);
    await poller.tick();
    const before = calls.length;
    await timer.flush(); // nothing scheduled: terminal state reached
    expect(calls.length).toBe(before);
    await poller.tick(); // explicit tick after stop is also a no-op
    expect(calls.length).toBe(before);
  });

  it("reports fetch failures through onError and keeps going", async () => {
    const { fetch } = scriptedFetch([() => ({ status: 500, json: { detail: "boom" } })]);
    const api = new ApiClient("", fetch);
    const errors: unknown[] = [];
    const timer = manualScheduler();
    const poller = new JobPoller(api, "j1", { onError: (e) => errors.push(e) }, 1000, timer.schedule);
    await poller.tick();
    expect(errors).toHaveLength(1);
    poller.stop();
  });
});
