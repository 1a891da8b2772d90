"""RIFF/WAVE reader and writer tests."""

import io
import struct

import numpy as np
import pytest

from isofade.audio import AudioClip
from isofade.errors import BadHeader, UnsupportedFormat
from isofade.wavio import from_base64, read_wav, to_base64, wav_bytes, write_wav


def sine_clip(freq=440.0, seconds=1.0, sr=32000, amp=0.5) -> AudioClip:
    t = np.arange(int(seconds * sr)) / sr
    return AudioClip((amp * np.sin(2 * np.pi * freq * t)).astype(np.float32), sr)


class TestRoundTrip:
    def test_float32_bit_identical(self):
        clip = sine_clip()
        back = read_wav(wav_bytes(clip, 32))
        assert back.sample_rate == clip.sample_rate
        assert np.array_equal(back.samples, clip.samples)

    def test_16bit_error_bound(self):
        clip = sine_clip(amp=0.9)
        back = read_wav(wav_bytes(clip, 16))
        err = np.max(np.abs(back.samples.astype(np.float64) - clip.samples))
        assert err <= 2.0**-15

    def test_full_scale_16bit(self):
        clip = AudioClip(np.array([1.0, -1.0, 0.0], dtype=np.float32))
        back = read_wav(wav_bytes(clip, 16))
        assert np.max(np.abs(back.samples.astype(np.float64) - clip.samples)) <= 2.0**-15

    def test_write_to_file_and_stream(self, tmp_path):
        clip = sine_clip()
        path = str(tmp_path / "clip.wav")
        write_wav(clip, path)
        assert np.array_equal(read_wav(path).samples, clip.samples)
        buf = io.BytesIO()
        write_wav(clip, buf, bit_depth=16)
        buf.seek(0)
        assert len(read_wav(buf)) == len(clip)

    def test_base64_round_trip(self):
        clip = sine_clip(seconds=0.1)
        assert np.array_equal(from_base64(to_base64(clip)).samples, clip.samples)


class TestErrors:
    def test_truncated_header(self):
        with pytest.raises(BadHeader):
            read_wav(b"RIFF\x00\x00")

    def test_wrong_magic(self):
        with pytest.raises(BadHeader):
            read_wav(b"OGGS" + b"\x00" * 64)

    def test_missing_data_chunk(self):
        fmt = struct.pack("<HHIIHH", 1, 1, 32000, 64000, 2, 16)
        blob = b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt)) + b"WAVE"
        blob += b"fmt " + struct.pack("<I", len(fmt)) + fmt
        with pytest.raises(BadHeader):
            read_wav(blob)

    def test_unsupported_bit_depth(self):
        clip = sine_clip(seconds=0.01)
        blob = bytearray(wav_bytes(clip, 16))
        struct.pack_into("<H", blob, 34, 8)  # claim 8-bit samples
        with pytest.raises(UnsupportedFormat):
            read_wav(bytes(blob))

    def test_writer_rejects_odd_depths(self):
        with pytest.raises(UnsupportedFormat):
            wav_bytes(sine_clip(seconds=0.01), 24)

    def test_bad_base64(self):
        with pytest.raises(BadHeader):
            from_base64("@@@not-base64@@@")


class TestChannels:
    def test_stereo_downmix_averages(self):
        left = np.full(320, 0.5, dtype="<f4")
        right = np.full(320, -0.1, dtype="<f4")
        interleaved = np.empty(640, dtype="<f4")
        interleaved[0::2] = left
        interleaved[1::2] = right
        body = interleaved.tobytes()
        header = struct.pack(
            "<4sI4s4sIHHIIHH4sI",
            b"RIFF", 36 + len(body), b"WAVE", b"fmt ", 16, 3, 2, 32000,
            32000 * 8, 8, 32, b"data", len(body),
        )
        clip = read_wav(header + body)
        assert np.allclose(clip.samples, 0.2, atol=1e-7)
        assert len(clip) == 320

    def test_too_many_channels(self):
        clip = sine_clip(seconds=0.01)
        blob = bytearray(wav_bytes(clip, 16))
        struct.pack_into("<H", blob, 22, 6)
        with pytest.raises(UnsupportedFormat):
            read_wav(bytes(blob))
