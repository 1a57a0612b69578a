export { BufferView, validateView, viewFromGrid } from "./buffers.js";
export { EngineError, runEngine, runEngineJsonLines } from "./cli.js";
export { readPfm, writeCsv, writePfm, writePgm } from "./formats.js";
export {
  boundGradient,
  boundScore,
  GradientResult,
  RelationInput,
  RelationKind,
  ScoreOptions,
  ScoreRecord,
} from "./bindings.js";
export { BanditClient, Observation, simulateSelection, SimulationSummary } from "./bandit.js";
export {
  GuidanceSchedule,
  GuidedStepResult,
  guidedStep,
  LARGE_BACKBONE_SCHEDULE,
  LoopTracePoint,
  monotoneFirstStepCount,
  mulberry32,
  runGuidedLoop,
  SMALL_BACKBONE_SCHEDULE,
  stepScale,
  stubAttentionMaps,
} from "./nursing.js";
