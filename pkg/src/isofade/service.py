"""HTTP service exposing planning, ingestion, DSP, evaluation, and sessions.

Session rendering can take minutes (or an hour against a real generation
backend), so sessions run as jobs: POST /sessions enqueues, GET
/sessions/{id} reports progress, and the WAV/manifest are fetched once the
job is done. Everything else is synchronous request/response. Errors come
back as ``{error_code, message}``.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from dataclasses import asdict
from typing import Any, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .dsp import DspConfig, crossfade_concat, highpass, normalize_peak, spectral_gate, trim_silence
from .emotions import load_mood_mapping, plan_path
from .errors import (
    BackendUnavailable,
    BadAudio,
    ConfigError,
    GenerationFailed,
    IsofadeError,
    SessionFailed,
    error_code as _error_code,
)
from .jamendo import compute_tag_stats, dump_tag_stats, parse_jamendo_tsv
from .metrics import (
    auprc,
    clap_style_score,
    emotion_match,
    fleiss_kappa,
    hamming_score,
    kappa_band,
    multilabel_accuracy,
)
from .session import SessionConfig, SessionResult, plan_session, run_session
from .wavio import from_base64, to_base64, wav_bytes

_BACKEND_ERRORS = (BackendUnavailable, BadAudio, GenerationFailed)


# --- request/response models -------------------------------------------------

class DspModel(BaseModel):
    trim_threshold_dbfs: Optional[float] = None
    trim_frame_ms: Optional[float] = None
    trim_hop_ms: Optional[float] = None
    normalize_peak_dbfs: Optional[float] = None
    crossfade_fraction: Optional[float] = None
    highpass_cutoff_hz: Optional[float] = None
    highpass_q: Optional[float] = None
    gate_percentile: Optional[float] = None
    gate_threshold_factor: Optional[float] = None
    gate_floor: Optional[float] = None
    normalize_before_trim: Optional[bool] = None

    def build(self) -> DspConfig:
        kwargs = {k: v for k, v in self.model_dump().items() if v is not None}
        return DspConfig(**kwargs)


class ValidationModel(BaseModel):
    enabled: Optional[bool] = None
    classifier_cmd: Optional[str] = None
    top_m: Optional[int] = None
    tolerance_deg: Optional[float] = None
    max_retries: Optional[int] = None


class SessionConfigModel(BaseModel):
    start_emotion: Optional[str] = None
    goal_emotion: Optional[str] = None
    target_duration_s: Optional[float] = None
    clip_duration_s: Optional[float] = None
    temperature: Optional[float] = None
    seed: Optional[int] = None
    backend: Optional[str] = None
    endpoint: Optional[str] = None
    initial_instrument: Optional[str] = None
    initial_genre: Optional[str] = None
    mapping_path: Optional[str] = None
    stats_path: Optional[str] = None
    conditioning_s: Optional[float] = None
    bit_depth: Optional[int] = None
    dsp: Optional[DspModel] = None
    validation: Optional[ValidationModel] = None

    def build(self) -> SessionConfig:
        doc = {k: v for k, v in self.model_dump().items()
               if v is not None and k not in ("dsp", "validation")}
        dsp = self.dsp.build() if self.dsp else DspConfig()
        validation_kwargs = {}
        if self.validation:
            validation_kwargs = {
                k: v for k, v in self.validation.model_dump().items() if v is not None
            }
        from .session import ValidationConfig

        return SessionConfig(
            dsp=dsp, validation=ValidationConfig(**validation_kwargs), **doc
        )


class PlanResponse(BaseModel):
    path: list[str]
    segment_count: int
    segments: list[dict]
    clip_samples: int
    overlap_samples: int
    total_samples: int
    duration_s: float


class StatsRequest(BaseModel):
    tsv_text: str


class StatsResponse(BaseModel):
    stats_json: str
    record_count: int
    mood_count: int
    errors: list[str]
    dropped_tags: int


class PairsRequest(BaseModel):
    truth: list[list[float]]
    scores: list[list[float]]
    threshold: float = 0.5


class RowsResponse(BaseModel):
    per_row: list[float]
    mean: float


class ClapRequest(BaseModel):
    audio_embeddings: list[list[float]]
    text_embeddings: list[list[float]]


class KappaRequest(BaseModel):
    counts: list[list[int]]


class KappaResponse(BaseModel):
    kappa: Optional[float]
    band: str
    subjects: int
    categories: int
    raters: int


class MatchRequest(BaseModel):
    probs: dict[str, float]
    intended: str
    top_m: int = 3
    tolerance_deg: float = 45.0
    mapping_path: Optional[str] = None


class MatchResponse(BaseModel):
    matched: bool
    angular_error_deg: float
    best_tag: str
    best_emotion: str


class DspProcessRequest(BaseModel):
    wavs_b64: list[str]
    dsp: Optional[DspModel] = None
    bit_depth: int = 32
    do_trim: bool = True
    do_normalize: bool = True
    do_highpass: bool = True
    do_gate: bool = True


class DspProcessResponse(BaseModel):
    wav_b64: str
    input_clips: int
    output_samples: int
    sample_rate: int


class SessionSubmitResponse(BaseModel):
    session_id: str
    status: str


class SessionStatusResponse(BaseModel):
    session_id: str
    status: str
    segments_done: int
    segment_count: int
    validation_exhausted: bool = False
    error_code: Optional[str] = None
    message: Optional[str] = None


# --- session job registry ----------------------------------------------------

class _Job:
    def __init__(self, config: SessionConfig):
        self.id = uuid.uuid4().hex[:12]
        self.config = config
        self.status = "queued"
        self.segments_done = 0
        self.segment_count = 0
        self.result: SessionResult | None = None
        self.wav: bytes | None = None
        self.partial_manifest: dict | None = None
        self.error_code: str | None = None
        self.message: str | None = None


class JobRegistry:
    """Single-worker queue; generation is sequential by design."""

    def __init__(self, keep_finished: int = 4):
        self._jobs: dict[str, _Job] = {}
        self._queue: "queue.Queue[_Job]" = queue.Queue()
        self._lock = threading.Lock()
        self._worker: threading.Thread | None = None
        self._keep_finished = keep_finished
        self._finished_order: list[str] = []

    def submit(self, config: SessionConfig) -> _Job:
        job = _Job(config)
        job.segment_count = plan_session(config).segment_count
        with self._lock:
            self._jobs[job.id] = job
            self._ensure_worker()
        self._queue.put(job)
        return job

    def get(self, job_id: str) -> _Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def _ensure_worker(self) -> None:
        if self._worker is None or not self._worker.is_alive():
            self._worker = threading.Thread(target=self._run, daemon=True)
            self._worker.start()

    def _run(self) -> None:
        while True:
            job = self._queue.get()
            job.status = "running"
            try:
                def progress(done: int, total: int, job=job):
                    job.segments_done = done
                    job.segment_count = total

                result = run_session(job.config, progress=progress)
                job.result = result
                job.wav = wav_bytes(result.clip, job.config.bit_depth)
                job.status = "done"
            except SessionFailed as exc:
                job.status = "failed"
                job.error_code = exc.error_code
                job.message = str(exc)
                job.partial_manifest = exc.partial_manifest
            except Exception as exc:  # job errors surface via status polling
                job.status = "failed"
                job.error_code = _error_code(exc)
                job.message = str(exc)
            finally:
                self._note_finished(job.id)
                self._queue.task_done()

    def _note_finished(self, job_id: str) -> None:
        with self._lock:
            self._finished_order.append(job_id)
            while len(self._finished_order) > self._keep_finished:
                old = self._finished_order.pop(0)
                stale = self._jobs.get(old)
                if stale is not None:
                    stale.wav = None
                    stale.result = None


def _http_status(exc: IsofadeError) -> int:
    if isinstance(exc, _BACKEND_ERRORS):
        return 502
    return 400


# --- app factory ---------------------------------------------------------------

def create_app() -> FastAPI:
    app = FastAPI(title="isofade", version=__version__)
    registry = JobRegistry()
    app.state.registry = registry

    @app.exception_handler(IsofadeError)
    async def isofade_error_handler(request: Request, exc: IsofadeError):
        return JSONResponse(
            status_code=_http_status(exc),
            content={"error_code": _error_code(exc), "message": str(exc)},
        )

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {"status": "ok", "version": __version__}

    @app.get("/defaults")
    def defaults() -> dict[str, Any]:
        return SessionConfig().to_dict()

    @app.post("/plan", response_model=PlanResponse)
    def plan(body: SessionConfigModel) -> PlanResponse:
        config = body.build()
        session_plan = plan_session(config)
        return PlanResponse(
            path=session_plan.path,
            segment_count=session_plan.segment_count,
            segments=[asdict(s) for s in session_plan.segments],
            clip_samples=session_plan.clip_samples,
            overlap_samples=session_plan.overlap_samples,
            total_samples=session_plan.total_samples,
            duration_s=session_plan.duration_s(),
        )

    @app.get("/path/{start}/{goal}")
    def path_endpoint(start: str, goal: str) -> dict[str, Any]:
        return {"path": plan_path(start, goal)}

    @app.post("/stats", response_model=StatsResponse)
    def stats(body: StatsRequest) -> StatsResponse:
        report = parse_jamendo_tsv(body.tsv_text.splitlines())
        tag_stats = compute_tag_stats(report.records)
        return StatsResponse(
            stats_json=dump_tag_stats(tag_stats),
            record_count=len(report.records),
            mood_count=len(tag_stats.per_mood),
            errors=[str(e) for e in report.errors],
            dropped_tags=report.dropped_tags,
        )

    @app.post("/eval/hamming", response_model=RowsResponse)
    def eval_hamming(body: PairsRequest) -> RowsResponse:
        rows = [
            hamming_score(t, s, body.threshold)
            for t, s in zip(body.truth, body.scores, strict=True)
        ]
        return RowsResponse(per_row=rows, mean=sum(rows) / len(rows))

    @app.post("/eval/subset", response_model=RowsResponse)
    def eval_subset(body: PairsRequest) -> RowsResponse:
        rows = [
            multilabel_accuracy(t, s, body.threshold)
            for t, s in zip(body.truth, body.scores, strict=True)
        ]
        return RowsResponse(per_row=rows, mean=sum(rows) / len(rows))

    @app.post("/eval/auprc", response_model=RowsResponse)
    def eval_auprc(body: PairsRequest) -> RowsResponse:
        rows = [
            auprc(s, t) for t, s in zip(body.truth, body.scores, strict=True)
        ]
        return RowsResponse(per_row=rows, mean=sum(rows) / len(rows))

    @app.post("/eval/clap", response_model=RowsResponse)
    def eval_clap(body: ClapRequest) -> RowsResponse:
        rows = [
            clap_style_score(a, t)
            for a, t in zip(body.audio_embeddings, body.text_embeddings, strict=True)
        ]
        return RowsResponse(per_row=rows, mean=sum(rows) / len(rows))

    @app.post("/eval/kappa", response_model=KappaResponse)
    def eval_kappa(body: KappaRequest) -> KappaResponse:
        value = fleiss_kappa(body.counts)
        return KappaResponse(
            kappa=None if value != value else value,  # NaN -> null
            band=kappa_band(value),
            subjects=len(body.counts),
            categories=len(body.counts[0]) if body.counts else 0,
            raters=int(sum(body.counts[0])) if body.counts else 0,
        )

    @app.post("/eval/match", response_model=MatchResponse)
    def eval_match(body: MatchRequest) -> MatchResponse:
        mapping = load_mood_mapping(body.mapping_path)
        result = emotion_match(
            body.probs, body.intended, mapping, body.top_m, body.tolerance_deg
        )
        return MatchResponse(
            matched=result.matched,
            angular_error_deg=result.angular_error_deg,
            best_tag=result.best_tag,
            best_emotion=result.best_emotion,
        )

    @app.post("/dsp/process", response_model=DspProcessResponse)
    def dsp_process(body: DspProcessRequest) -> DspProcessResponse:
        config = body.dsp.build() if body.dsp else DspConfig()
        clips = [from_base64(b) for b in body.wavs_b64]
        if not clips:
            raise ConfigError("need at least one WAV")
        processed = []
        for clip in clips:
            if body.do_trim:
                clip = trim_silence(clip, config)
            if body.do_normalize:
                clip = normalize_peak(clip, config.normalize_peak_dbfs)
            processed.append(clip)
        out = crossfade_concat(processed, config.crossfade_fraction)
        if body.do_highpass:
            out = highpass(out, config.highpass_cutoff_hz, config.highpass_q)
        if body.do_gate:
            out = spectral_gate(out, config)
        return DspProcessResponse(
            wav_b64=to_base64(out, body.bit_depth),
            input_clips=len(clips),
            output_samples=len(out),
            sample_rate=out.sample_rate,
        )

    @app.post("/sessions", response_model=SessionSubmitResponse)
    def submit_session(body: SessionConfigModel) -> SessionSubmitResponse:
        job = registry.submit(body.build())
        return SessionSubmitResponse(session_id=job.id, status=job.status)

    @app.get("/sessions/{session_id}", response_model=SessionStatusResponse)
    def session_status(session_id: str) -> SessionStatusResponse:
        job = registry.get(session_id)
        if job is None:
            raise ConfigError(f"unknown session {session_id!r}")
        return SessionStatusResponse(
            session_id=job.id,
            status=job.status,
            segments_done=job.segments_done,
            segment_count=job.segment_count,
            validation_exhausted=(
                job.result.validation_exhausted if job.result else False
            ),
            error_code=job.error_code,
            message=job.message,
        )

    @app.get("/sessions/{session_id}/manifest")
    def session_manifest(session_id: str) -> Response:
        job = registry.get(session_id)
        if job is None:
            raise ConfigError(f"no manifest for session {session_id!r}")
        if job.result is not None:
            content = job.result.manifest_json()
        elif job.partial_manifest is not None:
            content = json.dumps(job.partial_manifest, indent=2) + "\n"
        else:
            raise ConfigError(f"no manifest for session {session_id!r}")
        return Response(content=content, media_type="application/json")

    @app.get("/sessions/{session_id}/audio")
    def session_audio(session_id: str) -> Response:
        job = registry.get(session_id)
        if job is None or job.wav is None:
            raise ConfigError(f"no audio for session {session_id!r}")
        return Response(content=job.wav, media_type="audio/wav")

    return app
