import { describe, expect, it } from "vitest";

import { Clock, HoverScheduler } from "../src/debounce.js";

/** Manual clock with explicit timer firing. */
class FakeClock implements Clock {
  t = 0;
  private timers = new Map<number, { at: number; fn: () => void }>();
  private nextId = 1;

  now(): number {
    return this.t;
  }

  setTimeout(fn: () => void, ms: number): any {
    const id = this.nextId++;
    this.timers.set(id, { at: this.t + ms, fn });
    return id;
  }

  clearTimeout(id: any): void {
    this.timers.delete(id);
  }

  advance(ms: number): void {
    const target = this.t + ms;
    for (;;) {
      const due = [...this.timers.entries()]
        .filter(([, t]) => t.at <= target)
        .sort((a, b) => a[1].at - b[1].at)[0];
      if (!due) break;
      this.timers.delete(due[0]);
      this.t = due[1].at;
      due[1].fn();
    }
    this.t = target;
  }
}

function scheduler(clock: FakeClock, log: Array<[number, number]>, results: string[] = []) {
  return new HoverScheduler<[number, number], string>(
    async (p) => {
      log.push(p);
      return `r${log.length}`;
    },
    (r) => results.push(r),
    100,
    clock,
  );
}

describe("hover scheduling", () => {
  it("issues at most 2 requests for a 20-point burst within 100 ms", async () => {
    const clock = new FakeClock();
    const issued: Array<[number, number]> = [];
    const s = scheduler(clock, issued);
    for (let i = 0; i < 20; i++) {
      s.update([i, i]);
      clock.advance(4); // 20 events across 80 ms
    }
    clock.advance(200); // let the trailing timer fire
    expect(issued.length).toBeLessThanOrEqual(2);
    expect(issued.length).toBe(2); // leading + trailing
    expect(issued[0]).toEqual([0, 0]);
    expect(issued[1]).toEqual([19, 19]); // trailing carries the newest payload
  });

  it("keeps at least the interval between requests", () => {
    const clock = new FakeClock();
    const issued: Array<[number, number]> = [];
    const s = scheduler(clock, issued);
    const issueTimes: number[] = [];
    for (let i = 0; i < 50; i++) {
      const before = issued.length;
      s.update([i, 0]);
      if (issued.length > before) issueTimes.push(clock.t);
      clock.advance(10);
    }
    clock.advance(200);
    for (let i = 1; i < issueTimes.length; i++) {
      expect(issueTimes[i] - issueTimes[i - 1]).toBeGreaterThanOrEqual(100);
    }
  });

  it("drops stale responses (latest wins)", async () => {
    const clock = new FakeClock();
    const rendered: string[] = [];
    const resolvers: Array<(v: string) => void> = [];
    const s = new HoverScheduler<number, string>(
      () => new Promise<string>((resolve) => resolvers.push(resolve)),
      (r) => rendered.push(r),
      100,
      clock,
    );
    s.update(1); // request 1 (leading)
    clock.advance(150);
    s.update(2); // request 2
    expect(resolvers.length).toBe(2);
    resolvers[1]("new");
    resolvers[0]("old"); // resolves after a newer request exists -> dropped
    await Promise.resolve();
    expect(rendered).toEqual(["new"]);
  });

  it("cancel() drops queued trailing requests", () => {
    const clock = new FakeClock();
    const issued: Array<[number, number]> = [];
    const s = scheduler(clock, issued);
    s.update([1, 1]);
    s.update([2, 2]); // queued for trailing fire
    s.cancel();
    clock.advance(500);
    expect(issued.length).toBe(1);
  });
});
