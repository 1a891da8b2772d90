/**
 * HTTP surface.
 *
 * POST /generate  {prompt, duration_s, seed?, conditioning_wav_b64?}
 *                 -> 200 audio/wav (mono, 32 kHz, duration_s +/- 0.5 s)
 *                 -> 400/413/503 {error_code, message}
 * GET  /health    -> {status, model, loaded}
 *
 * Generations run one at a time: requests queue behind a promise chain.
 */

import express, { Express } from "express";
import { z } from "zod";

import { BadRequestError, Model } from "./model";

export interface ServerOptions {
  model: Model;
  maxDurationS: number;
}

const generateSchema = z.object({
  prompt: z.string().min(1),
  duration_s: z.number().positive(),
  seed: z.number().int().optional(),
  conditioning_wav_b64: z.string().optional(),
});

export function createServer(options: ServerOptions): Express {
  const app = express();
  app.use(express.json({ limit: "64mb" }));

  let queue: Promise<unknown> = Promise.resolve();

  app.get("/health", (_req, res) => {
    res.json({
      status: "ok",
      model: options.model.name,
      loaded: options.model.loaded,
    });
  });

  app.post("/generate", (req, res) => {
    const parsed = generateSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({
        error_code: "bad_request",
        message: parsed.error.issues
          .map((issue) => `${issue.path.join(".")}: ${issue.message}`)
          .join("; "),
      });
      return;
    }
    const body = parsed.data;
    if (body.duration_s > options.maxDurationS) {
      res.status(413).json({
        error_code: "duration_too_long",
        message: `duration_s ${body.duration_s} exceeds limit ${options.maxDurationS}`,
      });
      return;
    }
    if (!options.model.loaded) {
      res.status(503).json({
        error_code: "model_not_loaded",
        message: "model checkpoint is not loaded",
      });
      return;
    }

    let conditioningWav: Buffer | undefined;
    if (body.conditioning_wav_b64 !== undefined) {
      conditioningWav = Buffer.from(body.conditioning_wav_b64, "base64");
      if (conditioningWav.length === 0) {
        res.status(400).json({
          error_code: "bad_request",
          message: "conditioning_wav_b64 is not valid base64",
        });
        return;
      }
    }

    const job = queue.then(() =>
      options.model.generate({
        prompt: body.prompt,
        durationS: body.duration_s,
        seed: body.seed,
        conditioningWav,
      })
    );
    queue = job.catch(() => undefined); // keep the chain alive after failures

    job
      .then((wav) => {
        res.status(200).type("audio/wav").send(wav);
      })
      .catch((error: unknown) => {
        if (error instanceof BadRequestError || /RIFF|WAVE|chunk/.test(String(error))) {
          res.status(400).json({
            error_code: "bad_request",
            message: String(error instanceof Error ? error.message : error),
          });
        } else {
          res.status(500).json({
            error_code: "generation_failed",
            message: String(error instanceof Error ? error.message : error),
          });
        }
      });
  });

  return app;
}
