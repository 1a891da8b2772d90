"""End-to-end session orchestration: plan, generate, post-process, manifest.

A session walks the iso path from the start emotion to the goal emotion,
renders one clip per segment with continuity conditioning, validates the
perceived emotion when a classifier is configured, and assembles the
processed clips into a single WAV plus a manifest that makes stub-backend
runs byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import shlex
import subprocess
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Callable

from .audio import CANONICAL_RATE, AudioClip
from .dsp import (
    DspConfig,
    crossfade_concat,
    highpass,
    normalize_peak,
    spectral_gate,
    trim_bounds,
)
from .emotions import MoodMapping, canonical_emotion, load_mood_mapping, plan_path
from .errors import ConfigError, GenerationFailed, IsofadeError, SessionFailed
from .errors import error_code as isofade_error_code
from .generation import GenerationRequest, RemoteBackend, StubBackend, clip_digest
from .jamendo import TagStats, load_tag_stats
from .metrics import MatchResult, emotion_match
from .prompts import (
    PromptSpec,
    TransitionPolicy,
    mood_for_emotion,
    render_prompt,
    sample_transition,
)

MANIFEST_FORMAT_VERSION = 1
MUSICGEN_URL_ENV = "ISOFADE_MUSICGEN_URL"

Classifier = Callable[[AudioClip], dict[str, float]]


@dataclass
class ValidationConfig:
    enabled: bool = False
    classifier_cmd: str | None = None
    top_m: int = 3
    tolerance_deg: float = 45.0
    max_retries: int = 3


@dataclass
class SessionConfig:
    start_emotion: str = "stressed"
    goal_emotion: str = "calm"
    target_duration_s: float = 900.0
    clip_duration_s: float = 30.0
    temperature: float = 0.5
    seed: int = 7
    backend: str = "stub"
    endpoint: str | None = None
    initial_instrument: str = "piano"
    initial_genre: str = "classical"
    mapping_path: str | None = None
    stats_path: str | None = None
    conditioning_s: float = 10.0
    bit_depth: int = 32
    dsp: DspConfig = field(default_factory=DspConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)

    @property
    def crossfade_fraction(self) -> float:
        return self.dsp.crossfade_fraction

    def __post_init__(self):
        self.start_emotion = canonical_emotion(self.start_emotion)
        self.goal_emotion = canonical_emotion(self.goal_emotion)
        if self.target_duration_s < self.clip_duration_s:
            raise ConfigError("target duration must be at least one clip long")
        if not 1.0 <= self.clip_duration_s <= 120.0:
            raise ConfigError("clip duration must be in [1, 120] s")
        if not 0.0 < self.conditioning_s < self.clip_duration_s:
            raise ConfigError("conditioning length must be shorter than a clip")
        if self.backend not in ("stub", "remote"):
            raise ConfigError(f"unknown backend {self.backend!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        doc = dict(doc)
        dsp = doc.pop("dsp", {})
        validation = doc.pop("validation", {})
        return cls(
            dsp=DspConfig(**dsp), validation=ValidationConfig(**validation), **doc
        )


@dataclass
class SegmentPlan:
    index: int
    emotion: str
    mood_tag: str


@dataclass
class SessionPlan:
    path: list[str]
    segments: list[SegmentPlan]
    clip_samples: int
    overlap_samples: int

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    @property
    def total_samples(self) -> int:
        step = self.clip_samples - self.overlap_samples
        return self.clip_samples + (self.segment_count - 1) * step

    def duration_s(self, sample_rate: int = CANONICAL_RATE) -> float:
        return self.total_samples / sample_rate


def segment_count_for(target_s: float, clip_s: float, fraction: float,
                      sample_rate: int = CANONICAL_RATE) -> int:
    """Smallest clip count whose assembled untrimmed duration reaches target.

    Sample-exact version of ceil((T - L) / (L * (1 - f))) + 1.
    """
    clip_samples = int(round(clip_s * sample_rate))
    target_samples = int(round(target_s * sample_rate))
    overlap = int(round(fraction * clip_samples))
    step = clip_samples - overlap
    if target_samples <= clip_samples:
        return 1
    return 1 + -((clip_samples - target_samples) // step)  # integer ceil


def allocate_segments(n: int, states: int) -> list[int]:
    """Split n segments over path states, remainder toward the front."""
    base, rem = divmod(n, states)
    return [base + 1] * rem + [base] * (states - rem)


def plan_session(
    config: SessionConfig,
    mapping: MoodMapping | None = None,
    stats: TagStats | None = None,
) -> SessionPlan:
    mapping = mapping or load_mood_mapping(config.mapping_path)
    stats = stats or load_tag_stats(config.stats_path)
    path = plan_path(config.start_emotion, config.goal_emotion)
    n = segment_count_for(
        config.target_duration_s, config.clip_duration_s, config.crossfade_fraction
    )
    n = max(n, len(path))  # every path state owns at least one segment
    counts = allocate_segments(n, len(path))
    segments = []
    for emotion, count in zip(path, counts):
        mood = mood_for_emotion(emotion, mapping, stats)
        for _ in range(count):
            segments.append(SegmentPlan(len(segments), emotion, mood))
    clip_samples = int(round(config.clip_duration_s * CANONICAL_RATE))
    overlap = int(round(config.crossfade_fraction * clip_samples))
    return SessionPlan(path, segments, clip_samples, overlap)


def derive_seed(seed: int, segment_index: int, attempt: int) -> int:
    """Stable 64-bit per-attempt generation seed."""
    digest = hashlib.sha256(f"{seed}:{segment_index}:{attempt}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_backend(config: SessionConfig):
    if config.backend == "stub":
        return StubBackend()
    endpoint = config.endpoint or os.environ.get(MUSICGEN_URL_ENV)
    if not endpoint:
        raise ConfigError(
            f"remote backend needs an endpoint (--endpoint or {MUSICGEN_URL_ENV})"
        )
    return RemoteBackend(endpoint)


def command_classifier(cmd: str) -> Classifier:
    """Wrap a shell command into a classifier callable.

    The command receives the clip as a WAV path ({wav} placeholder, or
    appended as the last argument) and must print a JSON object mapping
    mood tags to probabilities.
    """
    from .wavio import write_wav

    def classify(clip: AudioClip) -> dict[str, float]:
        with tempfile.NamedTemporaryFile(suffix=".wav", delete=False) as fh:
            path = fh.name
        try:
            write_wav(clip, path)
            argv = [a.replace("{wav}", path) for a in shlex.split(cmd)]
            if "{wav}" not in cmd:
                argv.append(path)
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=300)
            if proc.returncode != 0:
                raise GenerationFailed(
                    f"classifier exited {proc.returncode}: {proc.stderr[:200]}"
                )
            doc = json.loads(proc.stdout)
            return {str(k): float(v) for k, v in doc.items()}
        finally:
            os.unlink(path)

    return classify


@dataclass
class SessionResult:
    clip: AudioClip
    manifest: dict
    validation_exhausted: bool = False

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, indent=2) + "\n"


def _file_sha256(path: str | None, default_name: str) -> str:
    if path is None:
        from importlib import resources

        data = resources.files("isofade.data").joinpath(default_name).read_bytes()
    else:
        with open(path, "rb") as fh:
            data = fh.read()
    return hashlib.sha256(data).hexdigest()


def run_session(
    config: SessionConfig,
    backend=None,
    classifier: Classifier | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> SessionResult:
    """Render a full session and its manifest."""
    mapping = load_mood_mapping(config.mapping_path)
    stats = load_tag_stats(config.stats_path)
    plan = plan_session(config, mapping, stats)
    backend = backend or make_backend(config)
    validating = config.validation.enabled
    if validating and classifier is None:
        if not config.validation.classifier_cmd:
            raise ConfigError("validation enabled but no classifier configured")
        classifier = command_classifier(config.validation.classifier_cmd)
    policy = TransitionPolicy(config.temperature, config.seed)

    header = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "config": config.to_dict(),
        "mapping_sha256": _file_sha256(config.mapping_path, "mood_mapping.tsv"),
        "stats_sha256": _file_sha256(config.stats_path, "default_tag_stats.json"),
        "path": plan.path,
    }

    clips: list[AudioClip] = []
    segment_records: list[dict] = []
    exhausted = False
    prev_spec: PromptSpec | None = None
    conditioning: AudioClip | None = None

    def fail(exc: IsofadeError, segment_index: int) -> SessionFailed:
        partial = dict(header)
        partial["segments"] = segment_records
        partial["failure"] = {
            "error_code": isofade_error_code(exc),
            "message": str(exc),
            "failed_segment_index": segment_index,
            "completed_segments": len(segment_records),
        }
        return SessionFailed(str(exc), isofade_error_code(exc), partial)

    for seg in plan.segments:
        if prev_spec is None:
            spec = PromptSpec(
                mood_tag=seg.mood_tag,
                emotion=seg.emotion,
                instrument=config.initial_instrument.strip().lower(),
                genre=config.initial_genre.strip().lower(),
            )
            fallbacks: list[str] = []
        else:
            outcome = sample_transition(
                prev_spec, seg.emotion, mapping, stats, policy, seg.index
            )
            spec = outcome.spec
            fallbacks = outcome.fallbacks
        prompt = render_prompt(spec)

        match: MatchResult | None = None
        retries_used = 0
        attempts = config.validation.max_retries + 1 if validating else 1
        clip = trimmed = None
        head = tail = 0
        try:
            for attempt in range(attempts):
                gen_seed = derive_seed(config.seed, seg.index, attempt)
                request = GenerationRequest(
                    prompt=prompt,
                    duration_s=config.clip_duration_s,
                    conditioning=conditioning,
                    seed=gen_seed,
                )
                clip = backend.generate(request)
                if config.dsp.normalize_before_trim:
                    clip = normalize_peak(clip, config.dsp.normalize_peak_dbfs)
                begin, end = trim_bounds(clip, config.dsp)
                head, tail = begin, len(clip) - end
                trimmed = AudioClip(clip.samples[begin:end].copy(), clip.sample_rate)
                retries_used = attempt
                if not validating:
                    break
                match = emotion_match(
                    classifier(trimmed),
                    seg.emotion,
                    mapping,
                    config.validation.top_m,
                    config.validation.tolerance_deg,
                )
                if match.matched:
                    break
        except IsofadeError as exc:
            raise fail(exc, seg.index) from exc
        if validating and match is not None and not match.matched:
            exhausted = True

        pre_norm_peak = trimmed.peak()
        if not config.dsp.normalize_before_trim:
            processed = normalize_peak(trimmed, config.dsp.normalize_peak_dbfs)
        else:
            processed = trimmed
        conditioning = processed.tail(config.conditioning_s)
        clips.append(processed)

        segment_records.append(
            {
                "index": seg.index,
                "emotion": seg.emotion,
                "mood_tag": spec.mood_tag,
                "prompt": prompt,
                "instrument": spec.instrument,
                "genre": spec.genre,
                "generation_seed": gen_seed,
                "retries_used": retries_used,
                "match": None if match is None else match.matched,
                "angular_error_deg": (
                    None if match is None else round(match.angular_error_deg, 4)
                ),
                "fallbacks": fallbacks,
                "trimmed_head_samples": head,
                "trimmed_tail_samples": tail,
                "pre_normalization_peak": round(float(pre_norm_peak), 9),
                "clip_digest": clip_digest(processed),
            }
        )
        prev_spec = spec
        if progress:
            progress(len(clips), plan.segment_count)

    try:
        assembled = crossfade_concat(clips, config.crossfade_fraction)
        filtered = highpass(
            assembled, config.dsp.highpass_cutoff_hz, config.dsp.highpass_q
        )
        final = spectral_gate(filtered, config.dsp)
    except IsofadeError as exc:
        raise fail(exc, plan.segment_count) from exc

    manifest = dict(header)
    manifest["segments"] = segment_records
    manifest["totals"] = {
        "segment_count": plan.segment_count,
        "planned_untrimmed_samples": plan.total_samples,
        "total_samples": len(final),
        "duration_s": round(final.duration_s, 6),
        "sample_rate": final.sample_rate,
        "output_digest": clip_digest(final),
    }
    return SessionResult(final, manifest, exhausted)
