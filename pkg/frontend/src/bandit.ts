/**
 * Online model selection driven through the engine's bandit commands.
 *
 * The client keeps the observation history and replays it through
 * `opse-run` to obtain the next arm, so the selection logic lives entirely
 * in the engine; hosts only feed scores in [0, 1].
 */

import { runEngine, runEngineJsonLines } from "./cli.js";

export interface Observation {
  arm: number;
  score: number;
}

export class BanditClient {
  private readonly history: Observation[] = [];

  constructor(
    readonly arms: number,
    readonly alpha: number = 2.0,
  ) {
    if (!Number.isInteger(arms) || arms < 1) {
      throw new RangeError("need at least one arm");
    }
  }

  /** Arm to sample next, given everything observed so far. */
  nextArm(): number {
    const stdin = this.history.map((o) => JSON.stringify(o)).join("\n");
    const lines = runEngineJsonLines(
      ["opse-run", "--arms", String(this.arms), "--alpha", String(this.alpha)],
      stdin.length ? stdin + "\n" : "",
    ) as { t: number; next_arm: number }[];
    return lines[lines.length - 1].next_arm;
  }

  update(arm: number, score: number): void {
    if (!Number.isInteger(arm) || arm < 0 || arm >= this.arms) {
      throw new RangeError(`arm index ${arm} out of range`);
    }
    if (!(score >= 0 && score <= 1)) {
      throw new RangeError(`score ${score} outside [0, 1]`);
    }
    this.history.push({ arm, score });
  }

  get observations(): readonly Observation[] {
    return this.history;
  }
}

export interface SimulationSummary {
  pullCounts: number[][];
  bestArmPlurality: number;
}

export function simulateSelection(
  means: number[],
  rounds: number,
  alpha: number,
  seeds: number,
): SimulationSummary {
  const output = runEngine([
    "opse-sim",
    "--means", means.join(","),
    "--rounds", String(rounds),
    "--alpha", String(alpha),
    "--seeds", String(seeds),
  ]);
  const payload = JSON.parse(output) as {
    pull_counts: number[][];
    best_arm_plurality: number;
  };
  return { pullCounts: payload.pull_counts, bestArmPlurality: payload.best_arm_plurality };
}
