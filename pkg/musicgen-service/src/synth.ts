/**
 * Built-in deterministic generator.
 *
 * Stands in for a real model checkpoint so the service is fully
 * exercisable offline: output depends only on (prompt, duration, seed,
 * conditioning). The prompt hash picks a chord and timbre, the seed
 * drives a small PRNG for detune and noise, and conditioning audio is
 * crossfaded into the head of the clip for continuity.
 */

import { SAMPLE_RATE } from "./wav";

/** xmur3 string hash -> 32-bit state */
function hashPrompt(prompt: string): number {
  let h = 1779033703 ^ prompt.length;
  for (let i = 0; i < prompt.length; i++) {
    h = Math.imul(h ^ prompt.charCodeAt(i), 3432918353);
    h = (h << 13) | (h >>> 19);
  }
  h = Math.imul(h ^ (h >>> 16), 2246822507);
  h = Math.imul(h ^ (h >>> 13), 3266489909);
  return (h ^= h >>> 16) >>> 0;
}

/** mulberry32 PRNG */
function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const SCALE_HZ = [110.0, 123.47, 130.81, 146.83, 164.81, 174.61, 196.0, 220.0];

export interface SynthOptions {
  prompt: string;
  durationS: number;
  seed?: number;
  conditioning?: Float32Array;
}

export function synthesize(options: SynthOptions): Float32Array {
  const n = Math.round(options.durationS * SAMPLE_RATE);
  const promptHash = hashPrompt(options.prompt);
  const rng = makeRng((options.seed ?? 0) ^ promptHash);

  const root = SCALE_HZ[promptHash % SCALE_HZ.length];
  const third = root * ((promptHash >> 3) % 2 === 0 ? 1.25 : 1.2); // major/minor
  const fifth = root * 1.5;
  const lfoHz = 0.1 + ((promptHash >> 5) % 16) / 16;
  const detune = 1 + (rng() - 0.5) * 0.004;
  const noiseLevel = 0.002 + rng() * 0.004;

  const out = new Float32Array(n);
  const tau = 2 * Math.PI;
  for (let i = 0; i < n; i++) {
    const t = i / SAMPLE_RATE;
    const swell = 0.75 + 0.25 * Math.sin(tau * lfoHz * t);
    const voice =
      0.5 * Math.sin(tau * root * detune * t) +
      0.3 * Math.sin(tau * third * t) +
      0.2 * Math.sin(tau * fifth * t);
    out[i] = 0.6 * swell * voice + noiseLevel * (rng() * 2 - 1);
  }

  // 50 ms raised-cosine fades
  const fade = Math.min(Math.round(0.05 * SAMPLE_RATE), Math.floor(n / 2));
  for (let i = 0; i < fade; i++) {
    const gain = 0.5 * (1 - Math.cos((Math.PI * i) / fade));
    out[i] *= gain;
    out[n - 1 - i] *= gain;
  }

  // continuity: blend the conditioning tail into the head
  const conditioning = options.conditioning;
  if (conditioning && conditioning.length > 0) {
    const blend = Math.min(SAMPLE_RATE, conditioning.length, n);
    const tail = conditioning.subarray(conditioning.length - blend);
    for (let i = 0; i < blend; i++) {
      const mix = 0.5 * (1 + Math.cos((Math.PI * i) / blend)); // 1 -> 0
      out[i] = mix * tail[i] + (1 - mix) * out[i];
    }
  }

  for (let i = 0; i < n; i++) {
    if (out[i] > 1) out[i] = 1;
    else if (out[i] < -1) out[i] = -1;
  }
  return out;
}
