/**
 * Model backends.
 *
 * BuiltinModel renders with the deterministic synthesizer. CommandModel
 * bridges to a real checkpoint by spawning an external generator command
 * (see scripts/musicgen_generate.py for a transformers-based MusicGen
 * bridge); the command receives prompt/duration/seed/conditioning and
 * must write a WAV file to the requested output path.
 */

import { execFile } from "child_process";
import { mkdtemp, readFile, rm, writeFile } from "fs/promises";
import { tmpdir } from "os";
import { join } from "path";

import { synthesize } from "./synth";
import { decodeWav, encodeWav16, SAMPLE_RATE } from "./wav";

export interface GenerateArgs {
  prompt: string;
  durationS: number;
  seed?: number;
  conditioningWav?: Buffer;
}

export interface Model {
  readonly name: string;
  readonly loaded: boolean;
  generate(args: GenerateArgs): Promise<Buffer>;
}

export class BuiltinModel implements Model {
  readonly loaded = true;

  constructor(readonly name: string = "builtin-small") {}

  async generate(args: GenerateArgs): Promise<Buffer> {
    let conditioning: Float32Array | undefined;
    if (args.conditioningWav) {
      const decoded = decodeWav(args.conditioningWav);
      if (decoded.sampleRate !== SAMPLE_RATE) {
        throw new BadRequestError(
          `conditioning must be ${SAMPLE_RATE} Hz, got ${decoded.sampleRate}`
        );
      }
      conditioning = decoded.samples;
    }
    const samples = synthesize({
      prompt: args.prompt,
      durationS: args.durationS,
      seed: args.seed,
      conditioning,
    });
    return encodeWav16(samples);
  }
}

export class CommandModel implements Model {
  readonly loaded = true;

  constructor(readonly command: string, readonly name: string) {}

  async generate(args: GenerateArgs): Promise<Buffer> {
    const workdir = await mkdtemp(join(tmpdir(), "musicgen-"));
    try {
      const outPath = join(workdir, "out.wav");
      const argv = [
        "--prompt", args.prompt,
        "--duration", String(args.durationS),
        "--out", outPath,
      ];
      if (args.seed !== undefined) argv.push("--seed", String(args.seed));
      if (args.conditioningWav) {
        const conditioningPath = join(workdir, "conditioning.wav");
        await writeFile(conditioningPath, args.conditioningWav);
        argv.push("--conditioning", conditioningPath);
      }
      await new Promise<void>((resolve, reject) => {
        execFile(this.command, argv, { timeout: 3_600_000 }, (error, _out, stderr) => {
          if (error) reject(new Error(`generator command failed: ${stderr || error}`));
          else resolve();
        });
      });
      return await readFile(outPath);
    } finally {
      await rm(workdir, { recursive: true, force: true });
    }
  }
}

export class BadRequestError extends Error {}
