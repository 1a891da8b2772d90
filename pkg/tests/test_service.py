"""HTTP surface tests via the in-process ASGI client."""

import json
import time
import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from isofade.audio import AudioClip
from isofade.service import create_app
from isofade.wavio import from_base64, read_wav, to_base64


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def wait_for_session(client, session_id, timeout_s=120.0):
    deadline = time.time() + timeout_s
    while time.time() < deadline:
        status = client.get(f"/sessions/{session_id}").json()
        if status["status"] in ("done", "failed"):
            return status
        time.sleep(0.1)
    raise TimeoutError("session did not finish")


FAST_SESSION = {
    "start_emotion": "sad",
    "goal_emotion": "depressed",
    "target_duration_s": 10.0,
    "clip_duration_s": 4.0,
    "conditioning_s": 1.0,
    "seed": 3,
}


class TestBasics:
    def test_health(self, client):
        doc = client.get("/health").json()
        assert doc["status"] == "ok" and doc["version"]

    def test_defaults_echo_full_config(self, client):
        doc = client.get("/defaults").json()
        assert doc["start_emotion"] == "stressed"
        assert doc["dsp"]["crossfade_fraction"] == 0.25
        assert doc["validation"]["enabled"] is False

    def test_plan(self, client):
        response = client.post("/plan", json={})
        doc = response.json()
        assert doc["segment_count"] == 40
        assert doc["total_samples"] == 29_040_000
        assert doc["path"][0] == "stressed" and doc["path"][-1] == "calm"
        assert len(doc["segments"]) == 40

    def test_plan_rejects_unknown_emotion(self, client):
        response = client.post("/plan", json={"start_emotion": "angsty"})
        assert response.status_code == 400
        doc = response.json()
        assert doc["error_code"] == "unknown_emotion"
        assert "angsty" in doc["message"]

    def test_path_helper(self, client):
        doc = client.get("/path/stressed/calm").json()
        assert doc["path"] == ["stressed", "upset", "sad", "depressed", "bored", "calm"]


class TestStatsEndpoint:
    def test_stats_round_trip(self, client):
        tsv = (
            "TRACK_ID\tARTIST_ID\tALBUM_ID\tPATH\tDURATION\tTAGS\n"
            "t1\ta\tb\tp.mp3\t60.0\tmood/theme---happy\tinstrument---piano\n"
            "t2\ta\tb\tp.mp3\t60.0\tmood/theme---happy\tinstrument---guitar\n"
        )
        doc = client.post("/stats", json={"tsv_text": tsv}).json()
        assert doc["record_count"] == 2 and doc["mood_count"] == 1
        stats = json.loads(doc["stats_json"])
        assert stats["moods"]["happy"]["instruments"]["counts"] == {
            "guitar": 1, "piano": 1,
        }

    def test_stats_reports_bad_lines(self, client):
        tsv = "TRACK_ID\tX\nbroken line\n"
        doc = client.post("/stats", json={"tsv_text": tsv}).json()
        assert doc["record_count"] == 0 and len(doc["errors"]) == 1

    def test_stats_bad_header_is_400(self, client):
        response = client.post("/stats", json={"tsv_text": "WRONG\tHEADER\n"})
        assert response.status_code == 400
        assert response.json()["error_code"] == "malformed_line"


class TestEvalEndpoints:
    def test_hamming(self, client):
        doc = client.post(
            "/eval/hamming",
            json={"truth": [[1, 0, 1]], "scores": [[0.9, 0.2, 0.8]]},
        ).json()
        assert doc["per_row"] == [1.0] and doc["mean"] == 1.0

    def test_auprc(self, client):
        doc = client.post(
            "/eval/auprc",
            json={"truth": [[1, 0, 1, 0]], "scores": [[0.9, 0.8, 0.7, 0.6]]},
        ).json()
        assert doc["mean"] == pytest.approx((1 + 2 / 3) / 2)

    def test_clap(self, client):
        doc = client.post(
            "/eval/clap",
            json={"audio_embeddings": [[1, 0]], "text_embeddings": [[1, 0]]},
        ).json()
        assert doc["mean"] == pytest.approx(100.0)

    def test_kappa(self, client):
        doc = client.post(
            "/eval/kappa", json={"counts": [[3, 0], [0, 3], [2, 1]]}
        ).json()
        assert doc["kappa"] == pytest.approx(0.55, abs=1e-9)
        assert doc["band"] == "moderate"
        assert doc["raters"] == 3 and doc["subjects"] == 3

    def test_kappa_sentinel_serializes_as_null(self, client):
        doc = client.post("/eval/kappa", json={"counts": [[3, 0], [3, 0]]}).json()
        assert doc["kappa"] is None
        assert doc["band"].startswith("undefined")

    def test_match(self, client):
        doc = client.post(
            "/eval/match", json={"probs": {"happy": 0.9}, "intended": "happy"}
        ).json()
        assert doc["matched"] is True and doc["best_emotion"] == "happy"

    def test_error_mapping(self, client):
        response = client.post(
            "/eval/auprc", json={"truth": [[0, 0]], "scores": [[0.5, 0.5]]}
        )
        assert response.status_code == 400
        assert response.json()["error_code"] == "no_positives"


class TestDspEndpoint:
    def test_process_two_clips(self, client):
        t = np.arange(2 * 32000) / 32000
        a = AudioClip((0.5 * np.sin(2 * np.pi * 220 * t)).astype(np.float32))
        b = AudioClip((0.5 * np.sin(2 * np.pi * 330 * t)).astype(np.float32))
        doc = client.post(
            "/dsp/process",
            json={"wavs_b64": [to_base64(a), to_base64(b)], "do_gate": False},
        ).json()
        out = from_base64(doc["wav_b64"])
        overlap = int(round(0.25 * len(a)))
        assert len(out) == len(a) + len(b) - overlap
        assert doc["input_clips"] == 2

    def test_empty_request_rejected(self, client):
        response = client.post("/dsp/process", json={"wavs_b64": []})
        assert response.status_code == 400


class TestSessionJobs:
    def test_lifecycle(self, client):
        submitted = client.post("/sessions", json=FAST_SESSION).json()
        assert submitted["status"] in ("queued", "running")
        status = wait_for_session(client, submitted["session_id"])
        assert status["status"] == "done"
        assert status["segments_done"] == status["segment_count"]

        wav = client.get(f"/sessions/{submitted['session_id']}/audio")
        assert wav.headers["content-type"].startswith("audio/wav")
        clip = read_wav(wav.content)
        assert clip.sample_rate == 32000

        manifest = json.loads(
            client.get(f"/sessions/{submitted['session_id']}/manifest").content
        )
        assert manifest["totals"]["total_samples"] == len(clip)

    def test_unknown_session(self, client):
        assert client.get("/sessions/nope").status_code == 400
        assert client.get("/sessions/nope/audio").status_code == 400

    def test_invalid_config_rejected_up_front(self, client):
        response = client.post("/sessions", json={"backend": "warp"})
        assert response.status_code == 400
        assert response.json()["error_code"] == "config_error"

    def test_remote_backend_failure_reported(self, client):
        config = dict(FAST_SESSION)
        config.update(backend="remote", endpoint="http://127.0.0.1:9")  # nothing there
        submitted = client.post("/sessions", json=config).json()
        status = wait_for_session(client, submitted["session_id"], timeout_s=60)
        assert status["status"] == "failed"
        assert status["error_code"] == "backend_unavailable"
        # partial manifest: zero completed segments, failure block present
        manifest = json.loads(
            client.get(f"/sessions/{submitted['session_id']}/manifest").content
        )
        assert manifest["segments"] == []
        assert manifest["failure"]["error_code"] == "backend_unavailable"
        assert manifest["failure"]["failed_segment_index"] == 0
