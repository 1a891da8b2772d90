/** Minimal mono WAV encode/decode (PCM 16-bit and IEEE float-32). */

export const SAMPLE_RATE = 32000;

export interface DecodedWav {
  samples: Float32Array;
  sampleRate: number;
  channels: number;
}

export function encodeWav16(samples: Float32Array, sampleRate = SAMPLE_RATE): Buffer {
  const body = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    body.writeInt16LE(Math.round(clamped * 32767), i * 2);
  }
  return wrapRiff(body, sampleRate, 1, 16);
}

export function encodeWavFloat32(samples: Float32Array, sampleRate = SAMPLE_RATE): Buffer {
  const body = Buffer.alloc(samples.length * 4);
  for (let i = 0; i < samples.length; i++) {
    body.writeFloatLE(samples[i], i * 4);
  }
  return wrapRiff(body, sampleRate, 3, 32);
}

function wrapRiff(body: Buffer, sampleRate: number, formatTag: number, bits: number): Buffer {
  const bytesPerSample = bits / 8;
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + body.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(formatTag, 20);
  header.writeUInt16LE(1, 22);
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * bytesPerSample, 28);
  header.writeUInt16LE(bytesPerSample, 32);
  header.writeUInt16LE(bits, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(body.length, 40);
  return Buffer.concat([header, body]);
}

export function decodeWav(blob: Buffer): DecodedWav {
  if (blob.length < 12 || blob.toString("ascii", 0, 4) !== "RIFF" ||
      blob.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error("not a RIFF/WAVE payload");
  }
  let pos = 12;
  let fmt: { tag: number; channels: number; rate: number; bits: number } | null = null;
  let data: Buffer | null = null;
  while (pos + 8 <= blob.length) {
    const chunkId = blob.toString("ascii", pos, pos + 4);
    const size = blob.readUInt32LE(pos + 4);
    const bodyStart = pos + 8;
    if (chunkId === "fmt ") {
      if (size < 16) throw new Error("fmt chunk too small");
      fmt = {
        tag: blob.readUInt16LE(bodyStart),
        channels: blob.readUInt16LE(bodyStart + 2),
        rate: blob.readUInt32LE(bodyStart + 4),
        bits: blob.readUInt16LE(bodyStart + 14),
      };
    } else if (chunkId === "data") {
      data = blob.subarray(bodyStart, bodyStart + size);
    }
    pos = bodyStart + size + (size % 2);
  }
  if (!fmt || !data) throw new Error("missing fmt or data chunk");
  if (fmt.channels < 1 || fmt.channels > 2) throw new Error("mono or stereo only");

  let interleaved: Float32Array;
  if (fmt.tag === 1 && fmt.bits === 16) {
    const count = Math.floor(data.length / 2);
    interleaved = new Float32Array(count);
    for (let i = 0; i < count; i++) interleaved[i] = data.readInt16LE(i * 2) / 32767;
  } else if (fmt.tag === 3 && fmt.bits === 32) {
    const count = Math.floor(data.length / 4);
    interleaved = new Float32Array(count);
    for (let i = 0; i < count; i++) interleaved[i] = data.readFloatLE(i * 4);
  } else {
    throw new Error(`unsupported format tag ${fmt.tag} / ${fmt.bits}-bit`);
  }

  let samples = interleaved;
  if (fmt.channels === 2) {
    const mono = new Float32Array(Math.floor(interleaved.length / 2));
    for (let i = 0; i < mono.length; i++) {
      mono[i] = (interleaved[2 * i] + interleaved[2 * i + 1]) / 2;
    }
    samples = mono;
  }
  return { samples, sampleRate: fmt.rate, channels: 1 };
}
