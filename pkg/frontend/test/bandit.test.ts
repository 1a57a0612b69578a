import { describe, expect, it } from "vitest";

import { BanditClient, simulateSelection } from "../src/bandit.js";

describe("BanditClient", () => {
  it("initializes every arm before exploiting", () => {
    const client = new BanditClient(3, 2.0);
    expect(client.nextArm()).toBe(0);
    client.update(0, 1.0);
    expect(client.nextArm()).toBe(1);
    client.update(1, 0.0);
    expect(client.nextArm()).toBe(2);
  });

  it("prefers the better empirical mean once bonuses match", () => {
    const client = new BanditClient(2, 2.0);
    for (const [arm, score] of [
      [0, 1.0],
      [1, 0.0],
      [0, 1.0],
      [1, 0.0],
    ] as const) {
      client.update(arm, score);
    }
    expect(client.nextArm()).toBe(0);
  });

  it("rejects out-of-range updates locally", () => {
    const client = new BanditClient(2);
    expect(() => client.update(5, 0.5)).toThrow(RangeError);
    expect(() => client.update(0, 1.5)).toThrow(RangeError);
  });
});

describe("simulateSelection", () => {
  it("concentrates pulls on the best arm", () => {
    const summary = simulateSelection([0.6589, 0.2607, 0.2034], 100, 2.0, 20);
    expect(summary.pullCounts).toHaveLength(20);
    expect(summary.bestArmPlurality).toBeGreaterThanOrEqual(0.95);
    for (const counts of summary.pullCounts) {
      expect(counts.reduce((a, b) => a + b, 0)).toBe(100);
    }
  });
});
