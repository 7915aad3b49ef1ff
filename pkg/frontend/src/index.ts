/**
 * Thin bindings over the `inchify` command line.
 *
 * All chemistry lives in the CLI; this module only marshals inputs and
 * outputs, so binding results are byte-compatible with CLI results.
 * Fingerprint keys are 64-bit and therefore surfaced as bigint.
 *
 * The CLI invocation defaults to `python3 -m inchify.cli` and can be
 * overridden with the INCHIFY_CLI environment variable (whitespace
 * separated argv prefix).
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type InvariantMode = "daylight" | "inchified";

/** Post-normalization invariants, mirroring the featurize JSON. */
export interface InvariantFeatures {
  id: string;
  /** total formal charge of the input graph */
  charge: number;
  /** original atom indices of the non-phantom atoms */
  ids: number[];
  /** per-atom (Z, isotope, degree, inRing, numHs, num1H, num2H, num3H, cip) */
  atoms: number[][];
  /** surviving bonds as (i, j, bondCip) */
  bonds: number[][];
  /** original indices of phantom atoms (give them zero-valued features) */
  phantoms: number[];
}

export type SparseFingerprint = Map<bigint, number>;

export class InchifyError extends Error {}

function cliArgv(): string[] {
  const override = process.env.INCHIFY_CLI;
  if (override && override.trim()) {
    return override.trim().split(/\s+/);
  }
  return ["python3", "-m", "inchify.cli"];
}

export function runCli(args: string[], input: string): string {
  const dir = mkdtempSync(join(tmpdir(), "inchify-"));
  try {
    const inPath = join(dir, "in.smi");
    writeFileSync(inPath, input, "utf-8");
    const [command, ...prefix] = cliArgv();
    try {
      return execFileSync(command, [...prefix, ...args, "--in", inPath], {
        encoding: "utf-8",
        stdio: ["ignore", "pipe", "pipe"],
      });
    } catch (error) {
      const failure = error as { stderr?: string; status?: number };
      throw new InchifyError(
        (failure.stderr ?? "").trim() ||
          `inchify exited with status ${failure.status}`,
      );
    }
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Normalize one SMILES and return its invariant features. */
export function featurize(smiles: string): InvariantFeatures {
  const out = runCli(["featurize"], `${smiles} input\n`);
  const line = out.split("\n", 1)[0];
  if (!line) {
    throw new InchifyError("featurize produced no output");
  }
  return JSON.parse(line) as InvariantFeatures;
}

/** Sparse count fingerprint of one SMILES at the given radius and mode. */
export function fingerprint(
  smiles: string,
  radius: number,
  mode: InvariantMode,
): SparseFingerprint {
  if (!Number.isInteger(radius) || radius < 0) {
    throw new InchifyError("radius must be a non-negative integer");
  }
  const out = runCli(
    ["fingerprint", "--radius", String(radius), "--mode", mode],
    `${smiles} input\n`,
  );
  const line = out.split("\n", 1)[0];
  if (!line) {
    throw new InchifyError("fingerprint produced no output");
  }
  return parseFingerprintLine(line).fingerprint;
}

export function parseFingerprintLine(line: string): {
  id: string;
  fingerprint: SparseFingerprint;
} {
  const tab = line.indexOf("\t");
  const id = line.slice(0, tab);
  const fingerprint: SparseFingerprint = new Map();
  const body = line.slice(tab + 1).trim();
  if (body) {
    for (const item of body.split(" ")) {
      const colon = item.indexOf(":");
      fingerprint.set(BigInt(item.slice(0, colon)), Number(item.slice(colon + 1)));
    }
  }
  return { id, fingerprint };
}

export function renderFingerprintLine(
  id: string,
  fingerprint: SparseFingerprint,
): string {
  const keys = [...fingerprint.keys()].sort((a, b) => (a < b ? -1 : a > b ? 1 : 0));
  const body = keys.map((key) => `${key}:${fingerprint.get(key)}`).join(" ");
  return `${id}\t${body}`;
}

/** Generalized Tanimoto over count fingerprints: sum(min) / sum(max). */
export function tanimoto(a: SparseFingerprint, b: SparseFingerprint): number {
  if (a.size === 0 && b.size === 0) {
    return 1.0;
  }
  let lo = 0;
  let hi = 0;
  const keys = new Set([...a.keys(), ...b.keys()]);
  for (const key of keys) {
    const x = a.get(key) ?? 0;
    const y = b.get(key) ?? 0;
    lo += Math.min(x, y);
    hi += Math.max(x, y);
  }
  return hi === 0 ? 1.0 : lo / hi;
}
