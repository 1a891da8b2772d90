"""Mono PCM clip container shared by generation and DSP stages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CANONICAL_RATE = 32000


@dataclass
class AudioClip:
    """Mono float32 PCM in [-1, 1] with its sample rate."""

    samples: np.ndarray
    sample_rate: int = CANONICAL_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def channels(self) -> int:
        return 1

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)

    def tail(self, seconds: float) -> "AudioClip":
        """Final `seconds` of the clip (the whole clip when shorter)."""
        n = int(round(seconds * self.sample_rate))
        return AudioClip(self.samples[-n:] if n < len(self.samples) else self.samples,
                         self.sample_rate)

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0

    def rms(self) -> float:
        if not len(self.samples):
            return 0.0
        return float(np.sqrt(np.mean(np.square(self.samples, dtype=np.float64))))
