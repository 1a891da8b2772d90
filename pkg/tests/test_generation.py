"""Stub synthesizer and remote backend client tests."""

import json

import httpx
import numpy as np
import pytest

from isofade.audio import AudioClip
from isofade.emotions import EmotionPoint, emotion_coords
from isofade.errors import BackendUnavailable, BadAudio
from isofade.generation import (
    GenerationRequest,
    RemoteBackend,
    StubBackend,
    generate,
    stub_synthesize,
)
from isofade.wavio import wav_bytes


def dominant_frequency(samples: np.ndarray, sr: int, nfft: int = 32768) -> float:
    spectrum = np.abs(np.fft.rfft(samples[:nfft] * np.hanning(nfft)))
    return float(np.argmax(spectrum) * sr / nfft)


class TestStubSynth:
    def test_exact_sample_count(self):
        clip = stub_synthesize(emotion_coords("happy"), 30.0, 0)
        assert len(clip) == 960_000
        assert clip.sample_rate == 32000

    def test_deterministic(self):
        a = stub_synthesize(emotion_coords("sad"), 5.0, 123)
        b = stub_synthesize(emotion_coords("sad"), 5.0, 123)
        assert np.array_equal(a.samples, b.samples)
        c = stub_synthesize(emotion_coords("sad"), 5.0, 124)
        assert not np.array_equal(a.samples, c.samples)

    def test_happy_carrier_frequency(self):
        # valence 0.76 puts the carrier at 411.2 Hz
        clip = stub_synthesize(emotion_coords("happy"), 5.0, 7)
        bin_width = 32000 / 32768
        assert abs(dominant_frequency(clip.samples, 32000) - 411.2) <= bin_width

    def test_sad_carrier_frequency(self):
        clip = stub_synthesize(emotion_coords("sad"), 5.0, 7)
        bin_width = 32000 / 32768
        assert abs(dominant_frequency(clip.samples, 32000) - 218.0) <= bin_width

    def test_tremolo_rate_formula_endpoint(self):
        # arousal of -1 pins the tremolo envelope at exactly 1 Hz
        point = EmotionPoint("calm", 0.0, -1.0)
        clip = stub_synthesize(point, 4.0, 0)
        x = clip.samples.astype(np.float64)
        # envelope via rectified smoothing, ignoring the edge fades
        window = 320
        env = np.convolve(np.abs(x), np.ones(window) / window, mode="same")
        env = env[32000:-32000] - np.mean(env[32000:-32000])
        spectrum = np.abs(np.fft.rfft(env))
        peak_hz = np.argmax(spectrum[1:]) + 1
        resolution = 32000 / len(env)
        assert abs(peak_hz * resolution - 1.0) <= 2 * resolution

    def test_noise_floor_level(self):
        # two seeds share the deterministic tone; their difference is noise
        a = stub_synthesize(emotion_coords("calm"), 4.0, 1).samples.astype(np.float64)
        b = stub_synthesize(emotion_coords("calm"), 4.0, 2).samples.astype(np.float64)
        diff_rms = np.sqrt(np.mean((a - b)[32000:-32000] ** 2))
        expected = np.sqrt(2.0) * 10 ** (-45 / 20)
        assert 0.5 * expected < diff_rms < 2.0 * expected

    def test_fades_start_and_end_quiet(self):
        clip = stub_synthesize(emotion_coords("alert"), 2.0, 0)
        assert abs(clip.samples[0]) < 1e-3
        assert abs(clip.samples[-1]) < 1e-3

    def test_peak_within_unit_range(self):
        for name in ("happy", "calm", "tense"):
            clip = stub_synthesize(emotion_coords(name), 3.0, 9)
            assert clip.peak() <= 1.0


class TestStubBackend:
    def test_any_prompt_returns_full_clip(self):
        clip = generate(StubBackend(), GenerationRequest("gibberish, tokens", 30.0))
        assert len(clip) == 960_000

    def test_same_prompt_seed_bit_identical(self):
        backend = StubBackend()
        req = lambda: GenerationRequest("dark, depressed, cello, ambient", 10.0, seed=5)
        assert np.array_equal(
            backend.generate(req()).samples, backend.generate(req()).samples
        )

    def test_prompt_emotion_steers_carrier(self):
        backend = StubBackend()
        happy = backend.generate(GenerationRequest("happy, guitar, pop", 5.0, seed=1))
        sad = backend.generate(GenerationRequest("sad, piano, classical", 5.0, seed=1))
        assert dominant_frequency(happy.samples, 32000) > dominant_frequency(
            sad.samples, 32000
        )

    def test_conditioning_is_accepted(self):
        backend = StubBackend()
        tail = AudioClip(np.zeros(32000, dtype=np.float32))
        clip = backend.generate(
            GenerationRequest("calm, piano, ambient", 5.0, conditioning=tail, seed=3)
        )
        assert len(clip) == 160_000


class TestGenerationRequest:
    def test_duration_bounds(self):
        with pytest.raises(ValueError):
            GenerationRequest("x", 0.5)
        with pytest.raises(ValueError):
            GenerationRequest("x", 500.0)

    def test_conditioning_must_be_shorter_than_duration(self):
        cond = AudioClip(np.zeros(32000 * 6, dtype=np.float32))
        with pytest.raises(ValueError):
            GenerationRequest("x", 5.0, conditioning=cond)


def make_remote(handler, retries=2):
    return RemoteBackend(
        "http://musicgen.test",
        retries=retries,
        sleep=lambda _s: None,
        transport=httpx.MockTransport(handler),
    )


class TestRemoteBackend:
    def test_success_round_trip(self):
        served = stub_synthesize(emotion_coords("calm"), 5.0, 0)

        def handler(request: httpx.Request) -> httpx.Response:
            body = json.loads(request.content)
            assert body["prompt"] == "calm, piano, ambient"
            assert body["duration_s"] == 5.0
            assert body["seed"] == 11
            return httpx.Response(200, content=wav_bytes(served))

        clip = make_remote(handler).generate(
            GenerationRequest("calm, piano, ambient", 5.0, seed=11)
        )
        assert np.array_equal(clip.samples, served.samples)

    def test_client_error_body_surfaces_without_retry(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(
                413, json={"error_code": "duration_too_long", "message": "too long"}
            )

        with pytest.raises(BackendUnavailable, match="duration_too_long"):
            make_remote(handler).generate(GenerationRequest("x, y", 5.0))
        assert len(calls) == 1  # 4xx is not retried

    def test_server_errors_are_retried(self):
        served = stub_synthesize(emotion_coords("calm"), 5.0, 0)
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(
                    503, json={"error_code": "model_not_loaded", "message": "warming"}
                )
            return httpx.Response(200, content=wav_bytes(served))

        clip = make_remote(handler).generate(GenerationRequest("x, y", 5.0))
        assert len(calls) == 3 and len(clip) == 160_000

    def test_persistent_503_gives_up_with_message(self):
        def handler(request):
            return httpx.Response(
                503, json={"error_code": "model_not_loaded", "message": "warming up"}
            )

        with pytest.raises(BackendUnavailable, match="model_not_loaded"):
            make_remote(handler).generate(GenerationRequest("x, y", 5.0))

    def test_retries_then_gives_up(self):
        calls = []

        def handler(request):
            calls.append(1)
            raise httpx.ConnectError("refused")

        with pytest.raises(BackendUnavailable, match="unreachable"):
            make_remote(handler, retries=2).generate(GenerationRequest("x, y", 5.0))
        assert len(calls) == 3  # initial try + 2 retries

    def test_retry_then_success(self):
        served = stub_synthesize(emotion_coords("calm"), 5.0, 0)
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) == 1:
                raise httpx.ConnectTimeout("slow")
            return httpx.Response(200, content=wav_bytes(served))

        clip = make_remote(handler).generate(GenerationRequest("x, y", 5.0))
        assert len(calls) == 2 and len(clip) == 160_000

    def test_wrong_rate_rejected(self):
        bad = AudioClip(np.zeros(5 * 44100, dtype=np.float32), 44100)

        def handler(request):
            return httpx.Response(200, content=wav_bytes(bad))

        with pytest.raises(BadAudio, match="44100"):
            make_remote(handler).generate(GenerationRequest("x, y", 5.0))

    def test_wrong_duration_rejected(self):
        short = stub_synthesize(emotion_coords("calm"), 2.0, 0)

        def handler(request):
            return httpx.Response(200, content=wav_bytes(short))

        with pytest.raises(BadAudio, match="2.00 s"):
            make_remote(handler).generate(GenerationRequest("x, y", 5.0))

    def test_overdriven_audio_is_scaled_back(self):
        loud = AudioClip(np.full(160_000, 0.5, dtype=np.float32))
        loud.samples[100] = 1.0
        blob = bytearray(wav_bytes(loud))
        raw = np.frombuffer(bytes(blob[44:]), dtype="<f4").copy()
        raw *= 1.5  # peak 1.5 now
        blob[44:] = raw.astype("<f4").tobytes()

        def handler(request):
            return httpx.Response(200, content=bytes(blob))

        clip = make_remote(handler).generate(GenerationRequest("x, y", 5.0))
        assert clip.peak() <= 1.0
