/**
 * Invocation of the engine's command-line interface.
 *
 * The engine binary is `posrel` on PATH by default; set POSREL_CLI to
 * override (e.g. "python3 -m posrel.cli").
 */

import { spawnSync } from "node:child_process";

/** Engine-reported failure, carrying the engine's stderr text. */
export class EngineError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
  ) {
    super(message);
    this.name = "EngineError";
  }
}

function engineCommand(): string[] {
  const override = process.env.POSREL_CLI;
  return override ? override.split(/\s+/) : ["posrel"];
}

export function runEngine(args: string[], stdin?: string): string {
  const [command, ...prefix] = engineCommand();
  const result = spawnSync(command, [...prefix, ...args], {
    input: stdin,
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw result.error;
  }
  if (result.status !== 0) {
    throw new EngineError(
      (result.stderr || `engine exited with status ${result.status}`).trim(),
      result.status ?? -1,
    );
  }
  return result.stdout;
}

export function runEngineJsonLines(args: string[], stdin?: string): unknown[] {
  return runEngine(args, stdin)
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
}
