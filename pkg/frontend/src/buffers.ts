/**
 * Row-major numeric buffers exchanged with host pipelines.
 *
 * A view never leaves the caller's ownership: binding calls serialize its
 * contents to the engine's file formats and never write back into it.
 */

export interface BufferView {
  /** Grid height in pixels (rows). */
  height: number;
  /** Grid width in pixels (columns). */
  width: number;
  /** Contiguous row-major values, length height * width. */
  data: Float64Array | Float32Array;
}

export function validateView(view: BufferView, name: string): void {
  if (!Number.isInteger(view.width) || !Number.isInteger(view.height)) {
    throw new RangeError(`${name}: width and height must be integers`);
  }
  if (view.width <= 0 || view.height <= 0) {
    throw new RangeError(`${name}: width and height must be positive`);
  }
  if (view.data.length !== view.width * view.height) {
    throw new RangeError(
      `${name}: buffer length ${view.data.length} != width*height ${view.width * view.height}`,
    );
  }
  for (let i = 0; i < view.data.length; i++) {
    if (!Number.isFinite(view.data[i])) {
      throw new RangeError(`${name}: non-finite value at index ${i}`);
    }
  }
}

export function viewFromGrid(rows: number[][]): BufferView {
  const height = rows.length;
  const width = rows[0]?.length ?? 0;
  const data = new Float64Array(height * width);
  for (let y = 0; y < height; y++) {
    if (rows[y].length !== width) {
      throw new RangeError("ragged grid");
    }
    data.set(rows[y], y * width);
  }
  return { height, width, data };
}
