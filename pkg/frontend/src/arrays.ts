/** Row-major float32 buffer with an explicit shape. */
export interface BoundArray {
  shape: number[];
  data: Float32Array;
}

/** Row-major boolean mask with an explicit [height, width] shape. */
export interface BoundMask {
  shape: number[];
  data: Uint8Array; // 0 or 1
}

export function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function boundArray(shape: number[], data: Float32Array): BoundArray {
  if (data.length !== elementCount(shape)) {
    throw new RangeError(
      `buffer of ${data.length} elements does not match shape [${shape.join(", ")}]`,
    );
  }
  return { shape, data };
}

export function zeros(shape: number[]): BoundArray {
  return { shape, data: new Float32Array(elementCount(shape)) };
}

export function arraysEqual(a: BoundArray, b: BoundArray): boolean {
  if (a.shape.length !== b.shape.length) return false;
  if (a.shape.some((v, i) => v !== b.shape[i])) return false;
  // bit-level comparison: NaN-free buffers, so element equality suffices,
  // but compare the raw words to also distinguish -0/+0
  const wa = new Uint32Array(a.data.buffer, a.data.byteOffset, a.data.length);
  const wb = new Uint32Array(b.data.buffer, b.data.byteOffset, b.data.length);
  for (let i = 0; i < wa.length; i++) {
    if (wa[i] !== wb[i]) return false;
  }
  return true;
}
