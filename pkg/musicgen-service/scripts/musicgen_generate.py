#!/usr/bin/env python3
"""Bridge command for serving a real MusicGen checkpoint.

Used via MODEL_CMD="python3 scripts/musicgen_generate.py"; the service
invokes it per request with --prompt/--duration/--out (plus --seed and
--conditioning when present). Needs `transformers` and `torch`, and
downloads the checkpoint from the Hugging Face hub on first use. An
optional LoRA adapter directory (trained with peft; the usual recipe for
this setup is 2 epochs at learning rate 7e-6 with linear decay) can be
applied with --adapter.
"""

import argparse
import wave

MODEL_IDS = {
    "small": "facebook/musicgen-small",
    "medium": "facebook/musicgen-medium",
    "large": "facebook/musicgen-large",
}
FRAME_RATE = 50  # MusicGen autoregressive token rate


def read_wav_mono(path: str, target_rate: int):
    import numpy as np

    with wave.open(path, "rb") as fh:
        rate = fh.getframerate()
        channels = fh.getnchannels()
        raw = fh.readframes(fh.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype("float32") / 32767.0
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    if rate != target_rate:
        raise SystemExit(f"conditioning must be {target_rate} Hz, got {rate}")
    return samples


def write_wav_mono(path: str, samples, rate: int) -> None:
    import numpy as np

    clipped = np.clip(samples, -1.0, 1.0)
    with wave.open(path, "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes((clipped * 32767.0).round().astype("<i2").tobytes())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--prompt", required=True)
    parser.add_argument("--duration", type=float, required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--conditioning", help="WAV tail of the previous clip")
    parser.add_argument("--model-size", default="small", choices=sorted(MODEL_IDS))
    parser.add_argument("--adapter", help="optional peft/LoRA adapter directory")
    args = parser.parse_args()

    import torch
    from transformers import AutoProcessor, MusicgenForConditionalGeneration

    model_id = MODEL_IDS[args.model_size]
    processor = AutoProcessor.from_pretrained(model_id)
    model = MusicgenForConditionalGeneration.from_pretrained(model_id)
    if args.adapter:
        from peft import PeftModel

        model = PeftModel.from_pretrained(model, args.adapter)
    model.eval()

    if args.seed is not None:
        torch.manual_seed(args.seed)

    rate = model.config.audio_encoder.sampling_rate
    if args.conditioning:
        conditioning = read_wav_mono(args.conditioning, rate)
        inputs = processor(
            audio=conditioning, sampling_rate=rate, text=[args.prompt],
            return_tensors="pt",
        )
        extra_tokens = int(args.duration * FRAME_RATE)
    else:
        inputs = processor(text=[args.prompt], return_tensors="pt")
        extra_tokens = int(args.duration * FRAME_RATE)

    with torch.no_grad():
        audio = model.generate(
            **inputs, do_sample=True, guidance_scale=3.0,
            max_new_tokens=extra_tokens,
        )
    samples = audio[0, 0].cpu().numpy()
    wanted = int(args.duration * rate)
    write_wav_mono(args.out, samples[-wanted:], rate)


if __name__ == "__main__":
    main()
