/**
 * Writers and readers for the engine's file formats.
 *
 * Masks travel as binary PGM (P5, nonzero = member), float grids (depth,
 * attention, gradients) as grayscale PFM with a negative scale
 * (little-endian) and rows stored bottom-to-top.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { BufferView, validateView } from "./buffers.js";

export function writePgm(path: string, view: BufferView): void {
  validateView(view, "mask");
  const header = Buffer.from(`P5\n${view.width} ${view.height}\n255\n`, "ascii");
  const body = Buffer.alloc(view.width * view.height);
  for (let i = 0; i < view.data.length; i++) {
    body[i] = view.data[i] !== 0 ? 255 : 0;
  }
  writeFileSync(path, Buffer.concat([header, body]));
}

export function writePfm(path: string, view: BufferView): void {
  validateView(view, "float map");
  const header = Buffer.from(`Pf\n${view.width} ${view.height}\n-1.0\n`, "ascii");
  const body = Buffer.alloc(view.width * view.height * 4);
  // PFM rows run bottom-to-top.
  let offset = 0;
  for (let y = view.height - 1; y >= 0; y--) {
    for (let x = 0; x < view.width; x++) {
      body.writeFloatLE(view.data[y * view.width + x], offset);
      offset += 4;
    }
  }
  writeFileSync(path, Buffer.concat([header, body]));
}

export function readPfm(path: string): BufferView {
  const raw = readFileSync(path);
  const headerMatch = /^Pf\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s/.exec(
    raw.subarray(0, 64).toString("ascii"),
  );
  if (!headerMatch) {
    throw new Error(`${path}: not a grayscale PFM`);
  }
  const width = parseInt(headerMatch[1], 10);
  const height = parseInt(headerMatch[2], 10);
  const scale = parseFloat(headerMatch[3]);
  const littleEndian = scale < 0;
  const body = raw.subarray(headerMatch[0].length);
  const data = new Float64Array(width * height);
  for (let y = 0; y < height; y++) {
    const sourceRow = height - 1 - y;
    for (let x = 0; x < width; x++) {
      const offset = (sourceRow * width + x) * 4;
      data[y * width + x] = littleEndian
        ? body.readFloatLE(offset)
        : body.readFloatBE(offset);
    }
  }
  return { width, height, data };
}

export function writeCsv(path: string, view: BufferView): void {
  validateView(view, "grid");
  const lines: string[] = [];
  for (let y = 0; y < view.height; y++) {
    const row: string[] = [];
    for (let x = 0; x < view.width; x++) {
      row.push(String(view.data[y * view.width + x]));
    }
    lines.push(row.join(","));
  }
  writeFileSync(path, lines.join("\n") + "\n");
}
