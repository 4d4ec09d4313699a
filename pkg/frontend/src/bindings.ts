/**
 * Array-level operations backed by the toolkit CLI. Inputs cross the
 * boundary as plain camera dicts (the scene.json schema) and float32
 * buffers; image payloads travel through the toolkit's own file formats
 * (PNG, PFM, raw tensors), so every result is bit-identical to what the
 * CLI itself produces on the same inputs.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";
import { BoundArray, BoundMask, boundArray, zeros } from "./arrays.js";
import { runCli, withWorkDir } from "./cliRunner.js";
import { UsageError } from "./errors.js";
import { decodeRawTensor, encodePfm, encodeRawTensor } from "./formats.js";
import { decodePng, encodePng, floatsToPngBytes } from "./png.js";

export interface CameraDict {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
  R: number[];
  t: number[];
}

export interface ContextView {
  color: BoundArray; // (H, W, 3) in [0, 1]
  depth: BoundArray; // (H, W), 0 = invalid
  camera: CameraDict;
}

export interface GaugeDict {
  R: number[];
  t: number[];
}

function checkCamera(camera: CameraDict): void {
  if (
    typeof camera?.fx !== "number" ||
    typeof camera?.fy !== "number" ||
    typeof camera?.width !== "number" ||
    typeof camera?.height !== "number" ||
    !Array.isArray(camera?.R) ||
    camera.R.length !== 9 ||
    !Array.isArray(camera?.t) ||
    camera.t.length !== 3
  ) {
    throw new UsageError("malformed camera dict (needs fx, fy, cx, cy, width, height, R[9], t[3])");
  }
}

function writeColorPng(path: string, color: BoundArray): void {
  const [h, w, c] = color.shape;
  if (color.shape.length !== 3 || c !== 3) {
    throw new UsageError(`color image must be (H, W, 3), got [${color.shape.join(", ")}]`);
  }
  writeFileSync(
    path,
    encodePng({ width: w, height: h, channels: 3, pixels: floatsToPngBytes(color.data) }),
  );
}

function writeMaskPng(path: string, mask: Uint8Array, h: number, w: number): void {
  const pixels = new Uint8Array(mask.length);
  for (let i = 0; i < mask.length; i++) pixels[i] = mask[i] ? 255 : 0;
  writeFileSync(path, encodePng({ width: w, height: h, channels: 1, pixels }));
}

function readMask(path: string): BoundMask {
  const img = decodePng(readFileSync(path));
  const data = new Uint8Array(img.pixels.length);
  for (let i = 0; i < img.pixels.length; i++) data[i] = img.pixels[i] !== 0 ? 1 : 0;
  return { shape: [img.height, img.width], data };
}

function writeSceneDir(dir: string, contexts: ContextView[], target: CameraDict): void {
  const views: object[] = contexts.map((ctx, i) => {
    checkCamera(ctx.camera);
    const [h, w] = ctx.depth.shape;
    if (ctx.depth.shape.length !== 2 || h !== ctx.camera.height || w !== ctx.camera.width) {
      throw new UsageError(`context ${i}: depth shape [${ctx.depth.shape.join(", ")}] does not match camera`);
    }
    writeColorPng(join(dir, `v${i}_color.png`), ctx.color);
    writeFileSync(join(dir, `v${i}_depth.pfm`), encodePfm(h, w, ctx.depth.data));
    return {
      id: `v${i}`,
      camera: ctx.camera,
      color_path: `v${i}_color.png`,
      depth_path: `v${i}_depth.pfm`,
    };
  });
  checkCamera(target);
  views.push({ id: "target", camera: target, color_path: null, depth_path: null });
  const scene = {
    world_unit: "",
    views,
    context_ids: contexts.map((_, i) => i),
    target_ids: [contexts.length],
  };
  writeFileSync(join(dir, "scene.json"), JSON.stringify(scene));
}

/**
 * Unproject the context views and splat them into the target camera.
 * Returns the exact float32 colors plus the coverage mask. An empty context
 * list yields empty (all-background, zero-coverage) buffers.
 */
export function boundProjectiveCondition(
  contexts: ContextView[],
  target: CameraDict,
  radius = 1.0,
): { color: BoundArray; coverage: BoundMask } {
  checkCamera(target);
  if (contexts.length === 0) {
    return {
      color: zeros([target.height, target.width, 3]),
      coverage: {
        shape: [target.height, target.width],
        data: new Uint8Array(target.height * target.width),
      },
    };
  }
  return withWorkDir((dir) => {
    const sceneDir = join(dir, "scene");
    mkdirSync(sceneDir);
    writeSceneDir(sceneDir, contexts, target);
    const out = join(dir, "out");
    runCli([
      "project",
      "--scene", sceneDir,
      "--context", contexts.map((_, i) => `v${i}`).join(","),
      "--target", "target",
      "--radius", String(radius),
      "--out", out,
    ]);
    const color = decodeRawTensor(readFileSync(join(out, "color.rt")));
    return { color, coverage: readMask(join(out, "coverage.png")) };
  });
}

export interface CorruptionResult {
  image: BoundArray; // exact float32 corrupted image
  patchMask: BoundMask; // (rows, cols), 1 = patch removed
  pixelMask: BoundMask; // (H, W), 1 = pixel retained
}

/** Seeded three-stage corruption of one image; spec fields mirror the CLI. */
export function boundCorrupt(image: BoundArray, spec: Record<string, unknown>): CorruptionResult {
  if (image.shape.length !== 3 || image.shape[2] !== 3) {
    throw new UsageError(`image must be (H, W, 3), got [${image.shape.join(", ")}]`);
  }
  if (!("seed" in spec)) {
    throw new UsageError("corruption spec must include an explicit seed");
  }
  return withWorkDir((dir) => {
    const imgPath = join(dir, "input.png");
    writeColorPng(imgPath, image);
    const out = join(dir, "out");
    runCli(["corrupt", "--image", imgPath, "--spec", JSON.stringify(spec), "--out", out]);
    return {
      image: decodeRawTensor(readFileSync(join(out, "corrupted.rt"))),
      patchMask: readMask(join(out, "patch_mask.png")),
      pixelMask: readMask(join(out, "pixel_mask.png")),
    };
  });
}

export interface DollySchedule {
  anchorDepth: number;
  frames: number;
  deltaEnd?: number;
  fovStartDeg?: number;
  fovEndDeg?: number;
}

/** Dolly-zoom camera trajectory for a single camera. */
export function boundDollyZoomTrajectory(camera: CameraDict, schedule: DollySchedule): CameraDict[] {
  checkCamera(camera);
  return withWorkDir((dir) => {
    const sceneDir = join(dir, "scene");
    mkdirSync(sceneDir);
    writeFileSync(
      join(sceneDir, "scene.json"),
      JSON.stringify({
        world_unit: "",
        views: [{ id: "cam", camera, color_path: null, depth_path: null }],
        context_ids: [],
        target_ids: [0],
      }),
    );
    const args = [
      "dolly",
      "--scene", sceneDir,
      "--view", "cam",
      "--anchor-depth", String(schedule.anchorDepth),
      "--frames", String(schedule.frames),
    ];
    if (schedule.deltaEnd !== undefined) {
      args.push("--delta-end", String(schedule.deltaEnd));
    } else if (schedule.fovStartDeg !== undefined && schedule.fovEndDeg !== undefined) {
      args.push("--fov-start", String(schedule.fovStartDeg), "--fov-end", String(schedule.fovEndDeg));
    } else {
      throw new UsageError("schedule needs deltaEnd or fovStartDeg+fovEndDeg");
    }
    const stdout = runCli(args);
    return stdout
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line).camera as CameraDict);
  });
}

/**
 * Per-pixel 6-channel ray map (moment, direction) of a camera, optionally
 * transported by a world re-gauging.
 */
export function boundRayMap(camera: CameraDict, gauge?: GaugeDict): BoundArray {
  checkCamera(camera);
  return withWorkDir((dir) => {
    const out = join(dir, "rays.rt");
    const args = ["plucker", "--camera", JSON.stringify(camera), "--out", out];
    if (gauge) args.push("--gauge", JSON.stringify(gauge));
    runCli(args);
    return decodeRawTensor(readFileSync(out));
  });
}

export interface MetricsRecord {
  psnrDb: number; // Infinity for exact matches
  ssim: number;
  mse: number;
  validPixelCount: number;
  seenPsnrDb: number | null;
  unseenPsnrDb: number | null;
}

function parsePsnr(value: unknown): number {
  return value === "inf" ? Infinity : (value as number);
}

/** Masked PSNR / SSIM report; mask and coverage are optional (H, W) masks. */
export function boundMetrics(
  pred: BoundArray,
  gt: BoundArray,
  opts: { mask?: BoundMask; coverage?: BoundMask } = {},
): MetricsRecord {
  return withWorkDir((dir) => {
    const predPath = join(dir, "pred.rt");
    const gtPath = join(dir, "gt.rt");
    writeFileSync(predPath, encodeRawTensorFromArray(pred));
    writeFileSync(gtPath, encodeRawTensorFromArray(gt));
    const args = ["metrics", "--pred", predPath, "--gt", gtPath];
    if (opts.mask) {
      const p = join(dir, "mask.png");
      writeMaskPng(p, opts.mask.data, opts.mask.shape[0], opts.mask.shape[1]);
      args.push("--mask", p);
    }
    if (opts.coverage) {
      const p = join(dir, "coverage.png");
      writeMaskPng(p, opts.coverage.data, opts.coverage.shape[0], opts.coverage.shape[1]);
      args.push("--coverage", p);
    }
    const record = JSON.parse(runCli(args).trim());
    return {
      psnrDb: parsePsnr(record.psnr_db),
      ssim: record.ssim,
      mse: record.mse,
      validPixelCount: record.valid_pixel_count,
      seenPsnrDb: record.seen_psnr_db === null ? null : parsePsnr(record.seen_psnr_db),
      unseenPsnrDb: record.unseen_psnr_db === null ? null : parsePsnr(record.unseen_psnr_db),
    };
  });
}

function encodeRawTensorFromArray(arr: BoundArray): Buffer {
  // metrics accepts (H, W, C) raw tensors
  const shape = arr.shape.length === 2 ? [...arr.shape, 1] : arr.shape;
  return encodeRawTensor(shape, arr.data);
}

export { boundArray };
