/** Hover-request scheduling: throttled issue, latest-wins rendering.
 *
 * Requests are spaced at least `intervalMs` apart (leading edge fires
 * immediately when idle; a trailing call carries the newest payload).
 * Responses older than the latest issued request are discarded.
 */

export interface Clock {
  now(): number;
  setTimeout(fn: () => void, ms: number): ReturnType<typeof setTimeout>;
  clearTimeout(id: ReturnType<typeof setTimeout>): void;
}

const realClock: Clock = {
  now: () => Date.now(),
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (id) => clearTimeout(id),
};

export class HoverScheduler<P, R> {
  private lastIssued = -Infinity;
  private pendingPayload: P | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestCounter = 0;
  private renderedId = 0;

  constructor(
    private issue: (payload: P) => Promise<R>,
    private render: (result: R) => void,
    private intervalMs = 100,
    private clock: Clock = realClock,
    private onError: (err: unknown) => void = () => {},
  ) {}

  /** Call on every pointer move. */
  update(payload: P): void {
    const now = this.clock.now();
    if (now - this.lastIssued >= this.intervalMs && this.timer === null) {
      this.fire(payload, now);
    } else {
      this.pendingPayload = payload;
      if (this.timer === null) {
        const wait = Math.max(0, this.lastIssued + this.intervalMs - now);
        this.timer = this.clock.setTimeout(() => this.flush(), wait);
      }
    }
  }

  private flush(): void {
    this.timer = null;
    if (this.pendingPayload !== null) {
      const payload = this.pendingPayload;
      this.pendingPayload = null;
      this.fire(payload, this.clock.now());
    }
  }

  private fire(payload: P, now: number): void {
    this.lastIssued = now;
    const id = ++this.requestCounter;
    this.issue(payload).then(
      (result) => {
        // stale responses (an earlier request resolving late) are dropped
        if (id > this.renderedId && id === this.requestCounter) {
          this.renderedId = id;
          this.render(result);
        }
      },
      (err) => {
        if (id === this.requestCounter) this.onError(err);
      },
    );
  }

  /** Drop any queued trailing request and ignore in-flight responses. */
  cancel(): void {
    if (this.timer !== null) {
      this.clock.clearTimeout(this.timer);
      this.timer = null;
    }
    this.pendingPayload = null;
    this.requestCounter++;
  }

  get issuedCount(): number {
    return this.requestCounter;
  }
}
