/**
 * Buffer-in, record-out bindings over the engine CLI.
 *
 * Every call serializes its buffers to the engine's file formats in a
 * private temp directory, invokes one CLI subcommand, and parses the JSON
 * it emits, so results are identical to driving the CLI by hand --
 * including the 9-significant-digit float formatting. Input buffers are
 * never mutated.
 */

import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BufferView, validateView } from "./buffers.js";
import { EngineError, runEngine, runEngineJsonLines } from "./cli.js";
import { readPfm, writePfm, writePgm } from "./formats.js";

export type RelationKind =
  | "left"
  | "right"
  | "above"
  | "below"
  | "in_front"
  | "behind"
  | "top_left"
  | "top_right"
  | "bottom_left"
  | "bottom_right";

export interface RelationInput {
  subject: string;
  object: string;
  kind: RelationKind;
  c?: number | null;
}

export interface ScoreRecord {
  prompt_id: string;
  candidate_id: string;
  seed: number | null;
  relation: { subject: string; object: string; kind: string; c: number | null };
  pse: number;
  pos_forward: number;
  pos_backward: number;
  present_a: boolean;
  present_b: boolean;
  center_verdict: boolean | null;
}

export interface ScoreOptions {
  promptId?: string;
  candidateId?: string;
  seed?: number;
  threshold?: number;
  depthBins?: number;
  depthConvention?: "depth" | "disparity";
  combine?: "mean" | "min";
}

function withTempDir<T>(body: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "posrel-"));
  try {
    return body(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * Score one relation between two mask buffers (optionally with depth).
 *
 * An empty mask yields presence flags and a zero score, never a throw;
 * genuine contract violations (shape mismatch, missing depth) surface as
 * EngineError carrying the engine's message.
 */
export function boundScore(
  bufferA: BufferView,
  bufferB: BufferView,
  relation: RelationInput,
  depthBuffer?: BufferView,
  options: ScoreOptions = {},
): ScoreRecord {
  validateView(bufferA, "buffer_a");
  validateView(bufferB, "buffer_b");
  if (depthBuffer) {
    validateView(depthBuffer, "depth_buffer");
  }
  return withTempDir((dir) => {
    const maskA = join(dir, "a.pgm");
    const maskB = join(dir, "b.pgm");
    writePgm(maskA, bufferA);
    writePgm(maskB, bufferB);
    const line: Record<string, unknown> = {
      prompt_id: options.promptId ?? "bound",
      candidate_id: options.candidateId ?? "c0",
      mask_a: maskA,
      mask_b: maskB,
      relation: {
        subject: relation.subject,
        object: relation.object,
        kind: relation.kind,
        c: relation.c ?? null,
      },
    };
    if (options.seed !== undefined) {
      line.seed = options.seed;
    }
    if (depthBuffer) {
      const depthPath = join(dir, "depth.pfm");
      writePfm(depthPath, depthBuffer);
      line.depth = depthPath;
    }
    const args = ["score", "-"];
    if (options.depthBins !== undefined) {
      args.push("--depth-bins", String(options.depthBins));
    }
    if (options.depthConvention) {
      args.push("--depth-convention", options.depthConvention);
    }
    if (options.combine) {
      args.push("--combine", options.combine);
    }
    const records = runEngineJsonLines(args, JSON.stringify(line) + "\n");
    return records[0] as ScoreRecord;
  });
}

export interface GradientResult {
  loss: number;
  gradA: BufferView;
  gradB: BufferView;
}

/**
 * Loss and raw-weight gradients of the superiority objective for two
 * attention-map buffers. Composite kinds (top_left...) sum their
 * component-axis losses, matching the engine.
 */
export function boundGradient(
  bufferA: BufferView,
  bufferB: BufferView,
  kind: RelationKind,
): GradientResult {
  validateView(bufferA, "buffer_a");
  validateView(bufferB, "buffer_b");
  return withTempDir((dir) => {
    const mapA = join(dir, "a.pfm");
    const mapB = join(dir, "b.pfm");
    const outA = join(dir, "grad_a.pfm");
    const outB = join(dir, "grad_b.pfm");
    writePfm(mapA, bufferA);
    writePfm(mapB, bufferB);
    const output = runEngine([
      "grad",
      "--map-a", mapA,
      "--map-b", mapB,
      "--relation", kind,
      "--out-a", outA,
      "--out-b", outB,
    ]);
    const { loss } = JSON.parse(output) as { loss: number };
    return { loss, gradA: readPfm(outA), gradB: readPfm(outB) };
  });
}

export { EngineError };
