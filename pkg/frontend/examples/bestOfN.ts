/**
 * Best-of-N reranking from saved masks.
 *
 * A stub "generator" produces N candidate images per prompt; each
 * candidate is represented by the two object masks a detector would
 * extract from it. The engine scores every candidate and best-of-n keeps
 * the highest-scoring one per prompt. Run after `npm run build`:
 *
 *   node dist/examples/bestOfN.js
 */

import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BufferView } from "../src/buffers.js";
import { runEngine, runEngineJsonLines } from "../src/cli.js";
import { writePgm } from "../src/formats.js";
import { mulberry32 } from "../src/nursing.js";
import { ScoreRecord } from "../src/bindings.js";

const N = 8; // candidates per prompt
const SIZE = 64;

function rectMask(x0: number, y0: number, w: number, h: number): BufferView {
  const data = new Float64Array(SIZE * SIZE);
  for (let y = y0; y < Math.min(y0 + h, SIZE); y++) {
    for (let x = x0; x < Math.min(x0 + w, SIZE); x++) {
      data[y * SIZE + x] = 1;
    }
  }
  return { width: SIZE, height: SIZE, data };
}

function main(): void {
  const dir = mkdtempSync(join(tmpdir(), "posrel-bestofn-"));
  try {
    const prompts = [
      { id: "p0", subject: "dog", object: "tree" },
      { id: "p1", subject: "cat", object: "bowl" },
    ];
    const manifestLines: string[] = [];
    for (const prompt of prompts) {
      const rand = mulberry32(prompt.id === "p0" ? 11 : 22);
      for (let candidate = 0; candidate < N; candidate++) {
        // candidates place the subject at a random column; only some land
        // to the right of the object
        const subjectX = Math.floor(rand() * (SIZE - 12));
        const objectX = Math.floor(rand() * (SIZE - 12));
        const maskA = join(dir, `${prompt.id}_c${candidate}_a.pgm`);
        const maskB = join(dir, `${prompt.id}_c${candidate}_b.pgm`);
        writePgm(maskA, rectMask(subjectX, 20, 10, 16));
        writePgm(maskB, rectMask(objectX, 24, 10, 16));
        manifestLines.push(
          JSON.stringify({
            prompt_id: prompt.id,
            candidate_id: `c${candidate}`,
            seed: candidate,
            mask_a: maskA,
            mask_b: maskB,
            relation: { subject: prompt.subject, object: prompt.object, kind: "right" },
          }),
        );
      }
    }
    const manifest = join(dir, "manifest.jsonl");
    writeFileSync(manifest, manifestLines.join("\n") + "\n");

    const records = join(dir, "records.jsonl");
    runEngine(["batch", manifest, "--parallelism", "4", "--output", records]);
    const selected = runEngineJsonLines(["best-of-n", records]) as ScoreRecord[];

    for (const record of selected) {
      console.log(
        `${record.prompt_id}: kept ${record.candidate_id} ` +
          `(score ${record.pse}, forward ${record.pos_forward}, backward ${record.pos_backward})`,
      );
    }
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

main();
