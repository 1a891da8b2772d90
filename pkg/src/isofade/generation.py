"""Clip generation backends: a deterministic stub and a remote service client.

The remote wire protocol: ``POST {endpoint}/generate`` with a JSON body
``{prompt, duration_s, seed?, conditioning_wav_b64?}``; success returns a
WAV body (PCM 16-bit or float-32, mono, 32 kHz); failures return JSON
``{error_code, message}`` with a non-2xx status.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .audio import CANONICAL_RATE, AudioClip
from .emotions import EMOTION_POINTS, EmotionPoint
from .errors import BackendUnavailable, BadAudio
from .wavio import read_wav, to_base64

log = logging.getLogger(__name__)

STUB_FALLBACK_EMOTION = "calm"
_NOISE_STREAM = 0xA0D10  # second Philox key word for the stub's noise draw


@dataclass
class GenerationRequest:
    prompt: str
    duration_s: float = 30.0
    conditioning: AudioClip | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 1.0 <= self.duration_s <= 120.0:
            raise ValueError(f"duration_s must be in [1, 120], got {self.duration_s}")
        if self.conditioning is not None:
            limit = self.duration_s * self.conditioning.sample_rate
            if len(self.conditioning) >= limit:
                raise ValueError(
                    "conditioning must be shorter than the requested duration"
                )


def clip_digest(clip: AudioClip) -> str:
    return hashlib.sha256(clip.samples.tobytes()).hexdigest()


def stub_synthesize(emotion: EmotionPoint, duration_s: float, seed: int) -> AudioClip:
    """Deterministic emotion-colored test tone.

    Carrier at 200 + 120 * (valence + 1) Hz, tremolo at
    1 + 4 * (arousal + 1) Hz with depth 0.3, white noise at -45 dBFS so the
    spectral gate has something to chew on, and 50 ms raised-cosine fades.
    """
    sr = CANONICAL_RATE
    n = int(round(duration_s * sr))
    t = np.arange(n, dtype=np.float64) / sr

    f0 = 200.0 + 120.0 * (emotion.valence + 1.0)
    trem_rate = 1.0 + 4.0 * (emotion.arousal + 1.0)
    depth = 0.3
    envelope = 1.0 - depth * (0.5 + 0.5 * np.sin(2.0 * np.pi * trem_rate * t))
    tone = 0.8 * envelope * np.sin(2.0 * np.pi * f0 * t)

    rng = np.random.Generator(
        np.random.Philox(key=[seed & (2**64 - 1), _NOISE_STREAM])
    )
    noise = rng.standard_normal(n)
    noise *= 10.0 ** (-45.0 / 20.0) / np.sqrt(np.mean(noise * noise))

    x = tone + noise
    fade = min(int(round(0.05 * sr)), n // 2)
    if fade > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(fade) / fade))
        x[:fade] *= ramp
        x[-fade:] *= ramp[::-1]
    return AudioClip(x.astype(np.float32), sr)


def _emotion_from_prompt(prompt: str) -> EmotionPoint:
    for token in prompt.split(","):
        label = token.strip().lower()
        if label in EMOTION_POINTS:
            return EMOTION_POINTS[label]
    return EMOTION_POINTS[STUB_FALLBACK_EMOTION]


class StubBackend:
    """Offline deterministic backend; output depends only on (prompt, seed)."""

    name = "stub"

    def generate(self, request: GenerationRequest) -> AudioClip:
        if request.conditioning is not None:
            log.debug(
                "stub conditioning digest=%s", clip_digest(request.conditioning)
            )
        emotion = _emotion_from_prompt(request.prompt)
        return stub_synthesize(emotion, request.duration_s, request.seed or 0)


class RemoteBackend:
    """HTTP client for a generation service speaking the WAV wire protocol."""

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        timeout_s: float = 300.0,
        retries: int = 2,
        backoff_s: tuple[float, ...] = (0.5, 2.0),
        sleep=time.sleep,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self._sleep = sleep
        self._http = httpx.Client(timeout=timeout_s, transport=transport)

    def generate(self, request: GenerationRequest) -> AudioClip:
        body: dict = {"prompt": request.prompt, "duration_s": request.duration_s}
        if request.seed is not None:
            body["seed"] = request.seed
        if request.conditioning is not None:
            body["conditioning_wav_b64"] = to_base64(request.conditioning)

        last_error: str | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._http.post(f"{self.endpoint}/generate", json=body)
            except httpx.HTTPError as exc:
                last_error = str(exc) or type(exc).__name__
                if attempt < self.retries:
                    self._sleep(self.backoff_s[min(attempt, len(self.backoff_s) - 1)])
                continue
            if response.status_code >= 500:  # transient server side, retry
                last_error = _describe_failure(response)
                if attempt < self.retries:
                    self._sleep(self.backoff_s[min(attempt, len(self.backoff_s) - 1)])
                continue
            if response.status_code // 100 != 2:
                raise BackendUnavailable(_describe_failure(response))
            return self._validate(response.content, request)
        raise BackendUnavailable(f"generation service unreachable: {last_error}")

    def _validate(self, wav: bytes, request: GenerationRequest) -> AudioClip:
        clip = read_wav(wav)
        if clip.sample_rate != CANONICAL_RATE:
            raise BadAudio(
                f"service returned {clip.sample_rate} Hz, expected {CANONICAL_RATE}"
            )
        if abs(clip.duration_s - request.duration_s) > 0.5:
            raise BadAudio(
                f"service returned {clip.duration_s:.2f} s "
                f"for a {request.duration_s:.2f} s request"
            )
        if not np.all(np.isfinite(clip.samples)):
            raise BadAudio("service returned non-finite samples")
        peak = clip.peak()
        if peak > 1.0:
            clip = AudioClip(clip.samples / peak, clip.sample_rate)
        return clip


def _describe_failure(response: httpx.Response) -> str:
    try:
        doc = response.json()
        return f"{response.status_code} {doc.get('error_code')}: {doc.get('message')}"
    except Exception:
        return f"{response.status_code}: {response.text[:200]}"


def generate(backend, request: GenerationRequest) -> AudioClip:
    """Run one generation on any backend object with a generate() method."""
    return backend.generate(request)
