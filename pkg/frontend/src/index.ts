export const VERSION = "0.1.0";

export { BoundArray, BoundMask, boundArray, zeros, arraysEqual, elementCount } from "./arrays.js";
export {
  BindingError,
  IoError,
  UsageError,
  VerificationError,
} from "./errors.js";
export {
  CameraDict,
  ContextView,
  CorruptionResult,
  DollySchedule,
  GaugeDict,
  MetricsRecord,
  boundCorrupt,
  boundDollyZoomTrajectory,
  boundMetrics,
  boundProjectiveCondition,
  boundRayMap,
} from "./bindings.js";
export { cliVersion, runCli } from "./cliRunner.js";
export { decodePng, encodePng, pngToFloats, floatsToPngBytes, PngImage } from "./png.js";
export { decodePfm, encodePfm, decodeRawTensor, encodeRawTensor } from "./formats.js";
