/** Loss-curve model: an append-only series keyed by epoch.
 *
 * The job history endpoint returns the full prefix each poll, so appends
 * only ever extend the curve; anything at or before the last seen epoch
 * is ignored, which makes redundant polls and refresh-reattach free.
 */

export class LossSeries {
  readonly epochs: number[] = [];
  readonly losses: number[] = [];

  lastEpoch(): number {
    return this.epochs.length ? this.epochs[this.epochs.length - 1] : -1;
  }

  /** Merge a polled history prefix; returns how many points were new. */
  append(epochs: number[], losses: number[]): number {
    let added = 0;
    for (let i = 0; i < epochs.length; i++) {
      if (epochs[i] > this.lastEpoch()) {
        this.epochs.push(epochs[i]);
        this.losses.push(losses[i]);
        added++;
      }
    }
    return added;
  }

  /** Scale to pixel coordinates, y down, for a canvas polyline. */
  toPolyline(width: number, height: number): [number, number][] {
    if (this.epochs.length === 0) return [];
    const e0 = this.epochs[0];
    const e1 = Math.max(this.lastEpoch(), e0 + 1);
    const lmin = Math.min(...this.losses);
    const lmax = Math.max(...this.losses);
    const span = lmax > lmin ? lmax - lmin : 1;
    return this.epochs.map((e, i) => [
      ((e - e0) / (e1 - e0)) * width,
      height - ((this.losses[i] - lmin) / span) * height,
    ]);
  }
}
