/**
 * Denoising-loop callback against a stub attention provider.
 *
 * Demonstrates the integration contract for gradient-guided generation:
 * at each guided denoising step the host extracts per-token attention
 * maps, asks the engine for the relation-loss gradient, and applies a
 * scheduled update (here directly to the stub maps; a real host descends
 * its latent instead). No model is downloaded. Run after `npm run build`:
 *
 *   node dist/examples/nursingCallback.js
 */

import {
  LARGE_BACKBONE_SCHEDULE,
  monotoneFirstStepCount,
  runGuidedLoop,
  SMALL_BACKBONE_SCHEDULE,
} from "../src/nursing.js";

function main(): void {
  const instances = 50;
  const monotone = monotoneFirstStepCount(instances);
  console.log(
    `monotone first-step loss decrease: ${monotone}/${instances} random instances`,
  );
  if (monotone !== instances) {
    process.exitCode = 1;
    return;
  }

  for (const [label, schedule] of [
    ["large backbone (10 guided steps, factor 1000)", LARGE_BACKBONE_SCHEDULE],
    ["small backbone (25 guided steps, factor 20)", SMALL_BACKBONE_SCHEDULE],
  ] as const) {
    console.log(`\nguided loop, ${label}:`);
    const trace = runGuidedLoop(7, "left", schedule);
    for (const point of trace) {
      if (point.step % 5 === 0 || point.step === trace.length - 1) {
        console.log(
          `  step ${String(point.step).padStart(2)}  factor ${String(point.factor).padStart(6)}  loss ${point.loss.toFixed(6)}`,
        );
      }
    }
    const first = trace[0].loss;
    const last = trace[trace.length - 1].loss;
    console.log(`  loss moved ${first.toFixed(6)} -> ${last.toFixed(6)}`);
  }
}

main();
