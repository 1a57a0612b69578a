/**
 * Denoising-loop integration: a guided update step on attention buffers.
 *
 * A host diffusion pipeline extracts one aggregated cross-attention map
 * per token at each denoising step, asks the engine for the relation-loss
 * gradient, and descends it. The step-factor schedule mirrors the engine's
 * (initial factor over a guided window, constant or linearly decaying);
 * the applied step is normalized by the gradient's sup-norm so the update
 * stays a small fraction of the weight scale regardless of map size.
 */

import { BufferView } from "./buffers.js";
import { boundGradient, RelationKind } from "./bindings.js";

export interface GuidanceSchedule {
  scale0: number;
  steps: number;
  schedule: "constant" | "linear_decay";
}

/** Guided window and initial factor used on large denoiser backbones. */
export const LARGE_BACKBONE_SCHEDULE: GuidanceSchedule = {
  scale0: 1000,
  steps: 10,
  schedule: "constant",
};

/** Guided window and initial factor used on small denoiser backbones. */
export const SMALL_BACKBONE_SCHEDULE: GuidanceSchedule = {
  scale0: 20,
  steps: 25,
  schedule: "constant",
};

export function stepScale(t: number, schedule: GuidanceSchedule): number {
  if (t < 0) {
    throw new RangeError("step index must be nonnegative");
  }
  if (t >= schedule.steps) {
    return 0;
  }
  if (schedule.schedule === "linear_decay") {
    return schedule.scale0 * (1 - t / schedule.steps);
  }
  return schedule.scale0;
}

/** Deterministic 32-bit PRNG for the stub provider. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Stand-in for a model's cross-attention extraction: random positive maps
 * per token, seeded so runs reproduce. No model download involved.
 */
export function stubAttentionMaps(
  seed: number,
  height = 16,
  width = 16,
): { subject: BufferView; object: BufferView } {
  const rand = mulberry32(seed);
  const draw = (): BufferView => {
    const data = new Float64Array(height * width);
    for (let i = 0; i < data.length; i++) {
      data[i] = 0.05 + rand();
    }
    return { height, width, data };
  };
  return { subject: draw(), object: draw() };
}

export interface GuidedStepResult {
  lossBefore: number;
  lossAfter: number;
  subject: BufferView;
  object: BufferView;
}

/**
 * One guided update: fetch the gradient, descend it on both maps with a
 * sup-norm-normalized step, clamp at zero. `strength` is the fraction of
 * the schedule's current factor relative to its initial factor, times a
 * base rate small enough for a monotone first step.
 */
export function guidedStep(
  subject: BufferView,
  object: BufferView,
  kind: RelationKind,
  strength = 1.0,
  baseRate = 1e-3,
): GuidedStepResult {
  const before = boundGradient(subject, object, kind);
  const gradMax = Math.max(
    supNorm(before.gradA.data),
    supNorm(before.gradB.data),
  );
  if (gradMax === 0) {
    return { lossBefore: before.loss, lossAfter: before.loss, subject, object };
  }
  const eta = (baseRate * strength) / gradMax;
  const nextSubject = descend(subject, before.gradA, eta);
  const nextObject = descend(object, before.gradB, eta);
  const after = boundGradient(nextSubject, nextObject, kind);
  return {
    lossBefore: before.loss,
    lossAfter: after.loss,
    subject: nextSubject,
    object: nextObject,
  };
}

function supNorm(values: Float64Array | Float32Array): number {
  let max = 0;
  for (let i = 0; i < values.length; i++) {
    const v = Math.abs(values[i]);
    if (v > max) {
      max = v;
    }
  }
  return max;
}

function descend(view: BufferView, grad: BufferView, eta: number): BufferView {
  const data = new Float64Array(view.data.length);
  for (let i = 0; i < data.length; i++) {
    data[i] = Math.max(view.data[i] - eta * grad.data[i], 0);
  }
  return { height: view.height, width: view.width, data };
}

export interface LoopTracePoint {
  step: number;
  factor: number;
  loss: number;
}

/**
 * Run the guided window of a (stubbed) denoising loop for one relation,
 * scaling each update by the schedule. Each trace point carries the loss
 * before that step's update; a final point (factor 0) carries the loss
 * after the last one.
 */
export function runGuidedLoop(
  seed: number,
  kind: RelationKind,
  schedule: GuidanceSchedule,
  baseRate = 1e-3,
): LoopTracePoint[] {
  let { subject, object } = stubAttentionMaps(seed);
  const trace: LoopTracePoint[] = [];
  for (let t = 0; t < schedule.steps; t++) {
    const factor = stepScale(t, schedule);
    const grad = boundGradient(subject, object, kind);
    trace.push({ step: t, factor, loss: grad.loss });
    const gradMax = Math.max(supNorm(grad.gradA.data), supNorm(grad.gradB.data));
    if (gradMax > 0 && factor > 0) {
      const eta = (baseRate * (factor / schedule.scale0)) / gradMax;
      subject = descend(subject, grad.gradA, eta);
      object = descend(object, grad.gradB, eta);
    }
  }
  const final = boundGradient(subject, object, kind);
  trace.push({ step: schedule.steps, factor: 0, loss: final.loss });
  return trace;
}

/**
 * The acceptance probe: one small guided step on `instances` random stub
 * pairs; returns how many did not increase the loss (all, if the gradient
 * is right).
 */
export function monotoneFirstStepCount(instances = 50, kind: RelationKind = "right"): number {
  let monotone = 0;
  for (let seed = 0; seed < instances; seed++) {
    const { subject, object } = stubAttentionMaps(1000 + seed);
    const result = guidedStep(subject, object, kind);
    if (result.lossAfter <= result.lossBefore + 1e-12) {
      monotone += 1;
    }
  }
  return monotone;
}
