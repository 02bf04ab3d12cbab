/** Job polling loop: one in-flight request per job, fixed cadence
 * (1 s by default), stops itself on a terminal state and then fetches
 * the field list so views can populate.
 *
 * The timer is injected so tests can drive ticks synchronously.
 */

import type { ApiClient } from "./api.js";
import type { JobState } from "./types.js";
import { LossSeries } from "./lossChart.js";

const TERMINAL = new Set(["done", "failed", "aborted"]);

export interface PollerEvents {
  onState?: (state: JobState) => void;
  onHistory?: (series: LossSeries) => void;
  onFinished?: (state: JobState, fieldNames: string[]) => void;
  onError?: (err: unknown) => void;
}

export type Scheduler = (fn: () => void, ms: number) => unknown;

export class JobPoller {
  readonly series = new LossSeries();
  private inFlight = false;
  private stopped = false;

  constructor(
    private readonly api: ApiClient,
    private readonly jobId: string,
    private readonly events: PollerEvents = {},
    readonly cadenceMs: number = 1000,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  start(): void {
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
  }

  /** One poll cycle. Never runs concurrently with itself. */
  async tick(): Promise<void> {
    if (this.inFlight || this.stopped) return;
    this.inFlight = true;
    try {
      const state = await this.api.jobState(this.jobId);
      this.events.onState?.(state);
      const hist = await this.api.jobHistory(this.jobId);
      if (this.series.append(hist.epochs, hist.losses) > 0) {
        this.events.onHistory?.(this.series);
      }
      if (TERMINAL.has(state.state)) {
        this.stopped = true;
        const fields = state.state === "done" ? await this.api.jobFields(this.jobId) : { names: [] };
        this.events.onFinished?.(state, fields.names);
        return;
      }
    } catch (err) {
      this.events.onError?.(err);
    } finally {
      this.inFlight = false;
    }
    if (!this.stopped) this.schedule(() => void this.tick(), this.cadenceMs);
  }
}
