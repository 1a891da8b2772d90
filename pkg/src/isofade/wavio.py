"""Minimal RIFF/WAVE reader and writer.

Reads PCM 16-bit and IEEE float-32, mono or stereo (stereo is downmixed
by averaging). Writes mono 16-bit PCM or float-32. A float-32 write/read
round trip is bit-identical; 16-bit quantization error is bounded by
0.5/32767 per sample.
"""

from __future__ import annotations

import io
import struct
from typing import IO

import numpy as np

from .audio import AudioClip
from .errors import BadHeader, UnsupportedFormat

_FMT_PCM = 1
_FMT_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE


def read_wav(source: bytes | IO[bytes] | str) -> AudioClip:
    """Parse a WAV container into a mono AudioClip."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()

    if len(data) < 12:
        raise BadHeader("truncated RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise BadHeader("not a RIFF/WAVE stream")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise BadHeader("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _FMT_EXTENSIBLE:
                if size < 40:
                    raise BadHeader("extensible fmt chunk too small")
                sub_format = struct.unpack_from("<H", body, 24)[0]
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            if len(body) < size:
                raise BadHeader("data chunk truncated")
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise BadHeader("missing fmt chunk")
    if payload is None:
        raise BadHeader("missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels (mono/stereo only)")
    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float32) / 32767.0
    elif audio_format == _FMT_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        samples = raw.astype(np.float32)
    else:
        raise UnsupportedFormat(
            f"format tag {audio_format} with {bits}-bit samples"
        )

    if channels == 2:
        samples = samples[: len(samples) // 2 * 2].reshape(-1, 2)
        samples = samples.mean(axis=1, dtype=np.float64).astype(np.float32)
    return AudioClip(samples, sample_rate)


def wav_bytes(clip: AudioClip, bit_depth: int = 32) -> bytes:
    """Serialize a clip; bit_depth 32 writes IEEE float, 16 writes PCM."""
    if bit_depth == 32:
        fmt_tag, bytes_per = _FMT_FLOAT, 4
        body = np.asarray(clip.samples, dtype="<f4").tobytes()
    elif bit_depth == 16:
        fmt_tag, bytes_per = _FMT_PCM, 2
        clipped = np.clip(np.asarray(clip.samples, dtype=np.float64), -1.0, 1.0)
        body = np.round(clipped * 32767.0).astype("<i2").tobytes()
    else:
        raise UnsupportedFormat(f"bit depth {bit_depth} (16 or 32 only)")

    byte_rate = clip.sample_rate * bytes_per
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(body),
        b"WAVE",
        b"fmt ",
        16,
        fmt_tag,
        1,
        clip.sample_rate,
        byte_rate,
        bytes_per,
        bit_depth,
        b"data",
        len(body),
    )
    return header + body


def write_wav(clip: AudioClip, target: IO[bytes] | str, bit_depth: int = 32) -> None:
    data = wav_bytes(clip, bit_depth)
    if isinstance(target, str):
        with open(target, "wb") as fh:
            fh.write(data)
    else:
        target.write(data)


def read_wav_file(path: str) -> AudioClip:
    return read_wav(path)


def to_base64(clip: AudioClip, bit_depth: int = 32) -> str:
    import base64

    return base64.b64encode(wav_bytes(clip, bit_depth)).decode("ascii")


def from_base64(b64: str) -> AudioClip:
    import base64

    try:
        raw = base64.b64decode(b64, validate=True)
    except Exception as exc:
        raise BadHeader(f"invalid base64 WAV payload: {exc}") from exc
    return read_wav(io.BytesIO(raw))
