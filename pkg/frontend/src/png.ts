/**
 * Minimal PNG codec for the toolkit's image artifacts: 8-bit grayscale and
 * RGB, non-interlaced. The decoder handles all five scanline filters (what
 * any standard writer may emit); the encoder writes filter-0 rows.
 */

import * as zlib from "node:zlib";
import { IoError } from "./errors.js";

const SIGNATURE = Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]);

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

export interface PngImage {
  width: number;
  height: number;
  channels: 1 | 3;
  /** Row-major 8-bit samples, length = width * height * channels. */
  pixels: Uint8Array;
}

function chunk(type: string, data: Buffer): Buffer {
  const header = Buffer.alloc(4);
  header.writeUInt32BE(data.length);
  const body = Buffer.concat([Buffer.from(type, "ascii"), data]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body));
  return Buffer.concat([header, body, crc]);
}

export function encodePng(image: PngImage): Buffer {
  const { width, height, channels, pixels } = image;
  if (pixels.length !== width * height * channels) {
    throw new RangeError("pixel buffer does not match dimensions");
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr.writeUInt8(8, 8); // bit depth
  ihdr.writeUInt8(channels === 3 ? 2 : 0, 9); // color type
  // compression / filter / interlace all 0
  const stride = width * channels;
  const raw = Buffer.alloc((stride + 1) * height);
  for (let r = 0; r < height; r++) {
    raw[r * (stride + 1)] = 0; // filter: none
    raw.set(pixels.subarray(r * stride, (r + 1) * stride), r * (stride + 1) + 1);
  }
  const idat = zlib.deflateSync(raw);
  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function decodePng(buf: Buffer): PngImage {
  if (buf.length < 8 || !buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new IoError("not a PNG file");
  }
  let pos = 8;
  let width = 0;
  let height = 0;
  let channels: 1 | 3 = 1;
  const idat: Buffer[] = [];
  while (pos + 8 <= buf.length) {
    const length = buf.readUInt32BE(pos);
    const type = buf.toString("ascii", pos + 4, pos + 8);
    const data = buf.subarray(pos + 8, pos + 8 + length);
    pos += 12 + length;
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      const bitDepth = data.readUInt8(8);
      const colorType = data.readUInt8(9);
      const interlace = data.readUInt8(12);
      if (bitDepth !== 8 || interlace !== 0) {
        throw new IoError(`unsupported PNG (bit depth ${bitDepth}, interlace ${interlace})`);
      }
      if (colorType === 0) channels = 1;
      else if (colorType === 2) channels = 3;
      else throw new IoError(`unsupported PNG color type ${colorType}`);
    } else if (type === "IDAT") {
      idat.push(data);
    } else if (type === "IEND") {
      break;
    }
  }
  if (!width || !height) throw new IoError("PNG missing IHDR");
  const raw = zlib.inflateSync(Buffer.concat(idat));
  const stride = width * channels;
  if (raw.length !== (stride + 1) * height) {
    throw new IoError("PNG scanline data has unexpected length");
  }
  const pixels = new Uint8Array(stride * height);
  const bpp = channels;
  for (let r = 0; r < height; r++) {
    const filter = raw[r * (stride + 1)];
    const row = raw.subarray(r * (stride + 1) + 1, (r + 1) * (stride + 1));
    const out = pixels.subarray(r * stride, (r + 1) * stride);
    const prev = r > 0 ? pixels.subarray((r - 1) * stride, r * stride) : null;
    for (let i = 0; i < stride; i++) {
      const x = row[i];
      const a = i >= bpp ? out[i - bpp] : 0;
      const b = prev ? prev[i] : 0;
      const c = prev && i >= bpp ? prev[i - bpp] : 0;
      let value: number;
      switch (filter) {
        case 0:
          value = x;
          break;
        case 1:
          value = x + a;
          break;
        case 2:
          value = x + b;
          break;
        case 3:
          value = x + Math.floor((a + b) / 2);
          break;
        case 4:
          value = x + paeth(a, b, c);
          break;
        default:
          throw new IoError(`unsupported PNG filter ${filter}`);
      }
      out[i] = value & 0xff;
    }
  }
  return { width, height, channels, pixels };
}

/** Decode to float32 in [0, 1] (byte / 255), matching the toolkit's loader. */
export function pngToFloats(buf: Buffer): { shape: number[]; data: Float32Array } {
  const img = decodePng(buf);
  const data = new Float32Array(img.pixels.length);
  for (let i = 0; i < img.pixels.length; i++) {
    data[i] = Math.fround(img.pixels[i] / 255);
  }
  const shape =
    img.channels === 1 ? [img.height, img.width] : [img.height, img.width, 3];
  return { shape, data };
}

/** Quantize floats in [0, 1] to bytes with round-half-up, the toolkit rule. */
export function floatsToPngBytes(data: Float32Array): Uint8Array {
  const out = new Uint8Array(data.length);
  for (let i = 0; i < data.length; i++) {
    out[i] = Math.floor(data[i] * 255 + 0.5);
  }
  return out;
}
