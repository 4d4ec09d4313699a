/** Typed errors mirroring the CLI's stable exit codes. */

export class BindingError extends Error {}

/** Exit 2: bad arguments, malformed specs/cameras, domain violations. */
export class UsageError extends BindingError {}

/** Exit 3: missing files, malformed buffers, I/O failures. */
export class IoError extends BindingError {}

/** Exit 1: an invariant/verification suite reported failures. */
export class VerificationError extends BindingError {}

export function errorForExit(code: number, stderr: string): BindingError {
  const message = stderr.trim() || `command failed with exit code ${code}`;
  if (code === 1) return new VerificationError(message);
  if (code === 2) return new UsageError(message);
  if (code === 3) return new IoError(message);
  return new BindingError(message);
}
