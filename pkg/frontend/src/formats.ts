/**
 * Binary buffer formats shared with the toolkit: PFM depth maps and raw
 * float32 tensors. Both round-trip bit-exactly.
 */

import { IoError } from "./errors.js";
import { BoundArray } from "./arrays.js";

const RAW_TENSOR_MAGIC = "PVT1";

/** Grayscale little-endian PFM, rows stored bottom-up, scale line -1.0. */
export function encodePfm(height: number, width: number, data: Float32Array): Buffer {
  if (data.length !== height * width) {
    throw new RangeError("PFM buffer does not match dimensions");
  }
  const header = Buffer.from(`Pf\n${width} ${height}\n-1.0\n`, "ascii");
  const payload = Buffer.alloc(height * width * 4);
  for (let r = 0; r < height; r++) {
    const src = r * width;
    const dst = (height - 1 - r) * width; // bottom-up
    for (let c = 0; c < width; c++) {
      payload.writeFloatLE(data[src + c], (dst + c) * 4);
    }
  }
  return Buffer.concat([header, payload]);
}

export function decodePfm(buf: Buffer): { height: number; width: number; data: Float32Array } {
  const firstNl = buf.indexOf(0x0a);
  const secondNl = buf.indexOf(0x0a, firstNl + 1);
  const thirdNl = buf.indexOf(0x0a, secondNl + 1);
  if (firstNl < 0 || secondNl < 0 || thirdNl < 0) throw new IoError("bad PFM header");
  if (buf.toString("ascii", 0, firstNl) !== "Pf") {
    throw new IoError("expected grayscale PFM magic 'Pf'");
  }
  const dims = buf.toString("ascii", firstNl + 1, secondNl).trim().split(/\s+/);
  const width = Number(dims[0]);
  const height = Number(dims[1]);
  const scale = Number(buf.toString("ascii", secondNl + 1, thirdNl));
  if (!(width > 0 && height > 0) || !(scale < 0)) throw new IoError("bad PFM header");
  const payload = buf.subarray(thirdNl + 1);
  if (payload.length !== width * height * 4) throw new IoError("truncated PFM payload");
  const data = new Float32Array(height * width);
  for (let r = 0; r < height; r++) {
    const src = (height - 1 - r) * width;
    const dst = r * width;
    for (let c = 0; c < width; c++) {
      data[dst + c] = payload.readFloatLE((src + c) * 4);
    }
  }
  return { height, width, data };
}

/** Raw tensor: 16-byte header (magic + H, W, C uint32 LE) + float32 LE data. */
export function encodeRawTensor(shape: number[], data: Float32Array): Buffer {
  const [h, w, c] = shape.length === 2 ? [...shape, 1] : shape;
  if (shape.length < 2 || shape.length > 3 || data.length !== h * w * c) {
    throw new RangeError(`bad raw tensor shape [${shape.join(", ")}]`);
  }
  const out = Buffer.alloc(16 + data.length * 4);
  out.write(RAW_TENSOR_MAGIC, 0, "ascii");
  out.writeUInt32LE(h, 4);
  out.writeUInt32LE(w, 8);
  out.writeUInt32LE(c, 12);
  Buffer.from(data.buffer, data.byteOffset, data.byteLength).copy(out, 16);
  return out;
}

export function decodeRawTensor(buf: Buffer): BoundArray {
  if (buf.length < 16 || buf.toString("ascii", 0, 4) !== RAW_TENSOR_MAGIC) {
    throw new IoError("bad raw-tensor magic/header");
  }
  const h = buf.readUInt32LE(4);
  const w = buf.readUInt32LE(8);
  const c = buf.readUInt32LE(12);
  if (buf.length !== 16 + h * w * c * 4) {
    throw new IoError("raw-tensor payload does not match header");
  }
  const data = new Float32Array(h * w * c);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(16 + i * 4);
  }
  return { shape: [h, w, c], data };
}
