"""Post-production chain: trim, normalize, crossfade, high-pass, spectral gate.

All operations are pure: the input clip is never mutated, math runs in
float64, and results come back as fresh float32 clips.

The spectral gate uses a Hann 1024 / hop 256 STFT with weighted
overlap-add synthesis (analysis and synthesis both windowed, divided by
the accumulated squared window), which reconstructs the input exactly
when the gate gain is 1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.signal import lfilter

from .audio import AudioClip
from .errors import AllSilent, OverlapTooLong, RateMismatch, SilentClip, TooShort

STFT_WINDOW = 1024
STFT_HOP = 256
STFT_BINS = STFT_WINDOW // 2 + 1
_HANN = (0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(STFT_WINDOW) / STFT_WINDOW))

# Mask smoothing extent: 5 frames in time by 3 bins in frequency.
GATE_SMOOTH_FRAMES = 5
GATE_SMOOTH_BINS = 3


@dataclass
class DspConfig:
    trim_threshold_dbfs: float = -50.0
    trim_frame_ms: float = 20.0
    trim_hop_ms: float = 10.0
    normalize_peak_dbfs: float = -1.0
    crossfade_fraction: float = 0.25
    highpass_cutoff_hz: float = 40.0
    highpass_q: float = 0.7071
    gate_percentile: float = 10.0
    gate_threshold_factor: float = 1.5
    gate_floor: float = 0.1
    normalize_before_trim: bool = False

    def __post_init__(self):
        if not 0.0 < self.crossfade_fraction < 0.5:
            raise ValueError("crossfade_fraction must be in (0, 0.5)")
        for name in ("trim_threshold_dbfs", "normalize_peak_dbfs"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 < self.gate_floor <= 1.0:
            raise ValueError("gate_floor must be in (0, 1]")
        if self.gate_threshold_factor < 1.0:
            raise ValueError("gate_threshold_factor must be >= 1")
        if not 0.0 <= self.gate_percentile <= 100.0:
            raise ValueError("gate_percentile must be in [0, 100]")
        if self.trim_frame_ms <= 0 or self.trim_hop_ms <= 0:
            raise ValueError("trim frame/hop must be positive")


def dbfs_to_linear(dbfs: float) -> float:
    return 10.0 ** (dbfs / 20.0)


# --- trimming and normalization ---------------------------------------------

def trim_bounds(clip: AudioClip, config: DspConfig | None = None) -> tuple[int, int]:
    """Sample range [begin, end) that survives silence trimming."""
    config = config or DspConfig()
    sr = clip.sample_rate
    n = len(clip)
    if n < sr:
        raise TooShort(f"clip is {n / sr:.3f} s, need at least 1 s")

    frame = max(1, int(round(config.trim_frame_ms * sr / 1000.0)))
    hop = max(1, int(round(config.trim_hop_ms * sr / 1000.0)))
    threshold = dbfs_to_linear(config.trim_threshold_dbfs)

    x = clip.samples.astype(np.float64)
    energy = np.concatenate(([0.0], np.cumsum(x * x)))
    starts = np.arange(0, n, hop)
    stops = np.minimum(starts + frame, n)
    rms = np.sqrt((energy[stops] - energy[starts]) / (stops - starts))
    loud = np.flatnonzero(rms >= threshold)
    if loud.size == 0:
        raise AllSilent("no frame at or above the trim threshold")

    begin = int(starts[loud[0]])
    end = min(n, int(starts[loud[-1]]) + frame)
    if end - begin < sr:
        raise AllSilent("fewer than 1 s of non-silent audio remains")
    return begin, end


def trim_silence(clip: AudioClip, config: DspConfig | None = None) -> AudioClip:
    """Drop leading/trailing frames quieter than the trim threshold."""
    begin, end = trim_bounds(clip, config)
    return AudioClip(clip.samples[begin:end].copy(), clip.sample_rate)


def normalize_peak(clip: AudioClip, target_dbfs: float = -1.0) -> AudioClip:
    """Scale so that the absolute peak sits at the target level."""
    peak = clip.peak()
    if peak == 0.0:
        raise SilentClip("cannot normalize an all-zero clip")
    scale = dbfs_to_linear(target_dbfs) / peak
    scaled = clip.samples.astype(np.float64) * scale
    return AudioClip(scaled.astype(np.float32), clip.sample_rate)


# --- crossfade concatenation -------------------------------------------------

def crossfade_concat(clips: list[AudioClip], fraction: float = 0.25) -> AudioClip:
    """Concatenate with an overlap of `fraction` of each previous clip.

    Over the overlap the outgoing clip is weighted cos^2(pi*t/2) and the
    incoming sin^2(pi*t/2), t in [0, 1]; the two gains sum to 1 at every
    sample, so level is preserved through the joins. Total length is
    len(first) + sum(len(clip_i) - overlap_i).
    """
    if not clips:
        raise ValueError("need at least one clip")
    if not 0.0 <= fraction < 0.5:
        raise ValueError("fraction must be in [0, 0.5)")
    sr = clips[0].sample_rate
    for c in clips[1:]:
        if c.sample_rate != sr:
            raise RateMismatch(f"{c.sample_rate} Hz clip in a {sr} Hz sequence")

    if len(clips) == 1:
        return AudioClip(clips[0].samples.copy(), sr)

    overlaps = []
    for i in range(1, len(clips)):
        o = int(round(fraction * len(clips[i - 1])))
        if o > len(clips[i]):
            raise OverlapTooLong(
                f"overlap {o} exceeds clip {i} length {len(clips[i])}"
            )
        overlaps.append(o)

    total = len(clips[0]) + sum(len(c) - o for c, o in zip(clips[1:], overlaps))
    out = np.zeros(total, dtype=np.float64)
    pos = len(clips[0])
    out[:pos] = clips[0].samples
    for clip, o in zip(clips[1:], overlaps):
        x = clip.samples.astype(np.float64)
        if o > pos:
            raise OverlapTooLong(f"overlap {o} exceeds assembled length {pos}")
        if o > 0:
            t = np.linspace(0.0, 1.0, o)
            w_out = 0.5 * (1.0 + np.cos(np.pi * t))  # cos^2(pi*t/2)
            out[pos - o:pos] = out[pos - o:pos] * w_out + x[:o] * (1.0 - w_out)
        out[pos:pos + len(x) - o] = x[o:]
        pos += len(x) - o
    return AudioClip(out.astype(np.float32), sr)


# --- biquad high-pass --------------------------------------------------------

def highpass_coefficients(cutoff_hz: float, q: float, sample_rate: int):
    """Audio-cookbook second-order high-pass, normalized to a0 = 1."""
    w0 = 2.0 * math.pi * cutoff_hz / sample_rate
    alpha = math.sin(w0) / (2.0 * q)
    cosw = math.cos(w0)
    b = np.array([(1 + cosw) / 2.0, -(1 + cosw), (1 + cosw) / 2.0])
    a = np.array([1 + alpha, -2.0 * cosw, 1 - alpha])
    return b / a[0], a / a[0]


def highpass(clip: AudioClip, cutoff_hz: float = 40.0, q: float = 0.7071) -> AudioClip:
    if not 0.0 < cutoff_hz < clip.sample_rate / 2.0:
        raise ValueError("cutoff must sit inside (0, Nyquist)")
    b, a = highpass_coefficients(cutoff_hz, q, clip.sample_rate)
    y = lfilter(b, a, clip.samples.astype(np.float64))
    return AudioClip(y.astype(np.float32), clip.sample_rate)


# --- STFT machinery ----------------------------------------------------------

def _pad_layout(n: int) -> tuple[int, int, int]:
    """(left pad, padded length, frame count) for full interior coverage."""
    left = STFT_WINDOW - STFT_HOP
    last_start = ((left + n - 1) // STFT_HOP) * STFT_HOP
    total = last_start + STFT_WINDOW
    frames = last_start // STFT_HOP + 1
    return left, total, frames


def _frame_view(padded: np.ndarray, frames: int) -> np.ndarray:
    stride = padded.strides[0]
    return np.lib.stride_tricks.as_strided(
        padded, shape=(frames, STFT_WINDOW), strides=(STFT_HOP * stride, stride),
        writeable=False,
    )


def stft(samples: np.ndarray) -> np.ndarray:
    """Hann-windowed spectra, one row per frame (float64/complex128)."""
    n = len(samples)
    left, total, frames = _pad_layout(n)
    padded = np.zeros(total, dtype=np.float64)
    padded[left:left + n] = samples
    return np.fft.rfft(_frame_view(padded, frames) * _HANN, axis=1)


def istft(spectra: np.ndarray, n: int) -> np.ndarray:
    """Weighted overlap-add inverse of :func:`stft` for a length-n signal."""
    left, total, frames = _pad_layout(n)
    if spectra.shape != (frames, STFT_BINS):
        raise ValueError(f"expected {(frames, STFT_BINS)} spectra, got {spectra.shape}")
    out = np.zeros(total, dtype=np.float64)
    wsum = np.zeros(total, dtype=np.float64)
    segments = np.fft.irfft(spectra, n=STFT_WINDOW, axis=1) * _HANN
    w2 = _HANN * _HANN
    for m in range(frames):
        s = m * STFT_HOP
        out[s:s + STFT_WINDOW] += segments[m]
        wsum[s:s + STFT_WINDOW] += w2
    out /= np.maximum(wsum, 1e-12)
    return out[left:left + n]


# --- spectral gate -----------------------------------------------------------

def _phase_blocks(frames: int):
    """Frame phase classes for vectorized analysis and overlap-add.

    With window = 4 * hop, frames whose indices share a residue mod 4
    start a full window apart, so their spans tile the padded signal
    contiguously without overlap. Yields (phase, frame_count).
    """
    overlap_factor = STFT_WINDOW // STFT_HOP
    for r in range(overlap_factor):
        count = (frames - r + overlap_factor - 1) // overlap_factor
        if count > 0:
            yield r, count


def spectral_gate(clip: AudioClip, config: DspConfig | None = None) -> AudioClip:
    """Attenuate time-frequency bins below a per-bin noise floor.

    Per bin, the floor is the configured percentile of magnitudes across
    frames; bins above threshold_factor * floor form a binary mask, which
    is smoothed over 3 bins x 5 frames; the gate gain is
    mask + (1 - mask) * gate_floor. Output length equals input length.
    """
    config = config or DspConfig()
    n = len(clip)
    if n < STFT_WINDOW:
        raise TooShort(f"need at least {STFT_WINDOW} samples, got {n}")

    left, total, frames = _pad_layout(n)
    step = STFT_WINDOW // STFT_HOP
    padded = np.zeros(total, dtype=np.float64)
    padded[left:left + n] = clip.samples

    chunk = 8192
    mags = np.empty((frames, STFT_BINS), dtype=np.float32)
    for r, count in _phase_blocks(frames):
        block = padded[r * STFT_HOP:r * STFT_HOP + count * STFT_WINDOW]
        block = block.reshape(count, STFT_WINDOW)
        for k0 in range(0, count, chunk):
            k1 = min(k0 + chunk, count)
            spec = np.fft.rfft(block[k0:k1] * _HANN, axis=1)
            mags[r + k0 * step:r + k1 * step:step] = np.abs(spec).astype(np.float32)

    # interpolated percentile via partition (cheaper than a full sort)
    pos = (frames - 1) * config.gate_percentile / 100.0
    lo, hi = int(np.floor(pos)), int(np.ceil(pos))
    part = np.partition(mags, sorted({lo, hi}), axis=0)
    floor = part[lo] + (pos - lo) * (part[hi] - part[lo])
    threshold = (config.gate_threshold_factor * floor).astype(np.float32)
    gain = (mags > threshold[None, :]).astype(np.float32)
    del mags, part
    gain = uniform_filter(
        gain, size=(GATE_SMOOTH_FRAMES, GATE_SMOOTH_BINS), mode="nearest"
    )
    beta = config.gate_floor
    gain *= (1.0 - beta)
    gain += beta

    out = np.zeros(total, dtype=np.float64)
    wsum = np.zeros(total, dtype=np.float64)
    w2 = _HANN * _HANN
    for r, count in _phase_blocks(frames):
        base = r * STFT_HOP
        block = padded[base:base + count * STFT_WINDOW].reshape(count, STFT_WINDOW)
        for k0 in range(0, count, chunk):
            k1 = min(k0 + chunk, count)
            spec = np.fft.rfft(block[k0:k1] * _HANN, axis=1)
            spec *= gain[r + k0 * step:r + k1 * step:step]
            segments = np.fft.irfft(spec, n=STFT_WINDOW, axis=1)
            segments *= _HANN
            lo_s = base + k0 * STFT_WINDOW
            hi_s = base + k1 * STFT_WINDOW
            out[lo_s:hi_s] += segments.reshape(-1)
        wsum[base:base + count * STFT_WINDOW] += np.tile(w2, count)
    out /= np.maximum(wsum, 1e-12)
    return AudioClip(out[left:left + n].astype(np.float32), clip.sample_rate)
