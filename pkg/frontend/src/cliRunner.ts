/**
 * Process boundary to the toolkit CLI. The command defaults to `pvsm` on
 * PATH; set PVSM_CLI to override (e.g. "python3 -m pvsm"). Exit codes map
 * to the typed errors in errors.ts.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { errorForExit } from "./errors.js";

export function cliCommand(): string[] {
  const raw = process.env.PVSM_CLI ?? "pvsm";
  return raw.split(/\s+/).filter(Boolean);
}

export function runCli(args: string[]): string {
  const [cmd, ...prefix] = cliCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], {
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw errorForExit(3, `failed to spawn ${cmd}: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw errorForExit(proc.status ?? -1, proc.stderr ?? "");
  }
  return proc.stdout ?? "";
}

export function withWorkDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "pvsm-bind-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function cliVersion(): string {
  return runCli(["--version"]).trim();
}
