/** Spawn the real annotation service for end-to-end tests. */

import { spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";

export const SAMPLE_PATH = fileURLToPath(new URL("./fixtures/sample.jsonl", import.meta.url));

export interface ServiceHandle {
  url: string;
  labelsPath: string;
  stop: () => Promise<void>;
}

export async function startService(
  options: { overlapFraction?: number; seed?: number } = {},
): Promise<ServiceHandle> {
  const dir = mkdtempSync(join(tmpdir(), "annotate-ui-"));
  const labelsPath = join(dir, "labels.jsonl");
  const args = [
    "-m",
    "satdlink.cli",
    "annotate-serve",
    "--sample",
    SAMPLE_PATH,
    "--labels",
    labelsPath,
    "--port",
    "0",
  ];
  if (options.overlapFraction !== undefined) {
    args.push("--overlap-fraction", String(options.overlapFraction));
  }
  if (options.seed !== undefined) {
    args.push("--seed", String(options.seed));
  }
  const proc = spawn("python3", args, { stdio: ["ignore", "pipe", "pipe"] });
  const stderr: string[] = [];
  proc.stderr.on("data", (chunk: Buffer) => {
    stderr.push(chunk.toString());
  });

  // The CLI announces itself with one JSON line: {"serving": "http://..."}.
  const url = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => {
      proc.kill("SIGKILL");
      reject(new Error(`service did not start in time\n${stderr.join("")}`));
    }, 20000);
    createInterface({ input: proc.stdout }).on("line", (line) => {
      let banner: unknown;
      try {
        banner = JSON.parse(line);
      } catch {
        return;
      }
      const serving = (banner as { serving?: unknown }).serving;
      if (typeof serving === "string") {
        clearTimeout(timer);
        resolve(serving);
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early with code ${code}\n${stderr.join("")}`));
    });
  });

  const stop = (): Promise<void> =>
    new Promise((resolve) => {
      proc.once("exit", () => {
        rmSync(dir, { recursive: true, force: true });
        resolve();
      });
      proc.kill("SIGINT");
      const fallback = setTimeout(() => proc.kill("SIGKILL"), 3000);
      fallback.unref();
    });

  return { url, labelsPath, stop };
}
