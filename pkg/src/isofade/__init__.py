"""Iso-principle music session planner and renderer.

Plans a walk across the valence-arousal circumplex from a current to a
desired emotional state, drives a text-to-music backend segment by segment
with continuity conditioning, post-processes the clips (trim, normalize,
equal-level crossfade, high-pass, spectral gate), and writes a single
session WAV with a reproducibility manifest.
"""

__version__ = "0.1.0"

from .audio import CANONICAL_RATE, AudioClip
from .emotions import (
    CANONICAL_EMOTIONS,
    EMOTION_RING,
    EmotionPoint,
    MoodMapping,
    emotion_coords,
    load_mood_mapping,
    map_mood_tag,
    plan_path,
)
from .session import SessionConfig, SessionPlan, plan_session, run_session

__all__ = [
    "AudioClip",
    "CANONICAL_EMOTIONS",
    "CANONICAL_RATE",
    "EMOTION_RING",
    "EmotionPoint",
    "MoodMapping",
    "SessionConfig",
    "SessionPlan",
    "emotion_coords",
    "load_mood_mapping",
    "map_mood_tag",
    "plan_path",
    "plan_session",
    "run_session",
]
