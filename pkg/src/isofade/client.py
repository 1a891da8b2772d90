"""Thin client for the isofade service.

The CLI never calls the core library directly: it talks to the HTTP
surface. With a server URL it uses a plain httpx client; without one it
mounts the FastAPI app in-process behind the same interface, so the tool
works offline with identical semantics.
"""

from __future__ import annotations

import time
from typing import Any

import httpx


class ServiceError(Exception):
    """Non-2xx response decoded from {error_code, message}."""

    def __init__(self, status_code: int, error_code: str, message: str):
        super().__init__(f"{error_code}: {message}")
        self.status_code = status_code
        self.error_code = error_code
        self.message = message


class ServiceClient:
    def __init__(self, http: httpx.Client):
        self._http = http

    @classmethod
    def connect(cls, server_url: str | None = None) -> "ServiceClient":
        if server_url:
            return cls(httpx.Client(base_url=server_url.rstrip("/"), timeout=600.0))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

        from .service import create_app

        return cls(TestClient(create_app()))

    def close(self) -> None:
        self._http.close()

    # -- plumbing --------------------------------------------------------

    def _check(self, response: httpx.Response) -> httpx.Response:
        if response.status_code // 100 == 2:
            return response
        try:
            doc = response.json()
            raise ServiceError(
                response.status_code,
                str(doc.get("error_code", "error")),
                str(doc.get("message", doc)),
            )
        except ServiceError:
            raise
        except Exception:
            raise ServiceError(
                response.status_code, "error", response.text[:500]
            ) from None

    def _get_json(self, path: str) -> Any:
        return self._check(self._http.get(path)).json()

    def _post_json(self, path: str, body: dict) -> Any:
        return self._check(self._http.post(path, json=body)).json()

    # -- endpoints ---------------------------------------------------------

    def health(self) -> dict:
        return self._get_json("/health")

    def defaults(self) -> dict:
        return self._get_json("/defaults")

    def plan(self, config: dict) -> dict:
        return self._post_json("/plan", config)

    def stats(self, tsv_text: str) -> dict:
        return self._post_json("/stats", {"tsv_text": tsv_text})

    def eval_pairs(self, metric: str, truth, scores, threshold: float = 0.5) -> dict:
        return self._post_json(
            f"/eval/{metric}",
            {"truth": truth, "scores": scores, "threshold": threshold},
        )

    def eval_clap(self, audio_embeddings, text_embeddings) -> dict:
        return self._post_json(
            "/eval/clap",
            {"audio_embeddings": audio_embeddings, "text_embeddings": text_embeddings},
        )

    def eval_kappa(self, counts) -> dict:
        return self._post_json("/eval/kappa", {"counts": counts})

    def eval_match(self, probs, intended, top_m, tolerance_deg, mapping_path) -> dict:
        body = {
            "probs": probs,
            "intended": intended,
            "top_m": top_m,
            "tolerance_deg": tolerance_deg,
        }
        if mapping_path:
            body["mapping_path"] = mapping_path
        return self._post_json("/eval/match", body)

    def dsp_process(self, wavs_b64, dsp: dict | None, bit_depth: int, **steps) -> dict:
        body: dict = {"wavs_b64": wavs_b64, "bit_depth": bit_depth, **steps}
        if dsp:
            body["dsp"] = dsp
        return self._post_json("/dsp/process", body)

    def submit_session(self, config: dict) -> str:
        return self._post_json("/sessions", config)["session_id"]

    def session_status(self, session_id: str) -> dict:
        return self._get_json(f"/sessions/{session_id}")

    def session_manifest(self, session_id: str) -> bytes:
        return self._check(self._http.get(f"/sessions/{session_id}/manifest")).content

    def session_audio(self, session_id: str) -> bytes:
        return self._check(self._http.get(f"/sessions/{session_id}/audio")).content

    def run_session(
        self, config: dict, on_progress=None, poll_s: float = 0.25
    ) -> dict:
        """Submit and poll a session job until it finishes."""
        session_id = self.submit_session(config)
        last = -1
        while True:
            status = self.session_status(session_id)
            if on_progress and status["segments_done"] != last:
                last = status["segments_done"]
                on_progress(status)
            if status["status"] in ("done", "failed"):
                return status
            time.sleep(poll_s)
