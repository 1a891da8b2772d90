"""Generation prompt construction and seeded instrument/genre transitions.

Prompt format: comma-separated ``mood, emotion, instrument, genre`` tags,
with the mood token collapsed when it equals the emotion.

Transition randomness is fully specified so golden values survive
reimplementation:

* Generator: numpy Philox (4x64 counter-based) keyed with the two uint64
  words ``[rng_seed, step_index]``, wrapped in ``numpy.random.Generator``.
* Per step exactly four uniforms are drawn, in this order:
  ``u_switch_instrument``, ``u_pick_instrument``, ``u_switch_genre``,
  ``u_pick_genre``. The pick draws are consumed even when unused.
* A field is redrawn when its switch uniform is strictly below the
  temperature. The redraw is an inverse-CDF categorical pick over the
  mood's labels in ascending lexicographic order, probabilities
  ``count / total`` in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .emotions import MoodMapping, canonical_emotion
from .errors import EmptyDistribution, NoMoodForEmotion
from .jamendo import TagStats


@dataclass(frozen=True)
class PromptSpec:
    mood_tag: str
    emotion: str
    instrument: str
    genre: str

    def __post_init__(self):
        for name in ("mood_tag", "emotion", "instrument", "genre"):
            value = getattr(self, name)
            if not value or value != value.strip().lower():
                raise ValueError(f"{name} must be non-empty lowercase, got {value!r}")


@dataclass(frozen=True)
class TransitionPolicy:
    temperature: float
    rng_seed: int

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature must be in [0, 1], got {self.temperature}")


@dataclass
class TransitionOutcome:
    spec: PromptSpec
    instrument_redrawn: bool = False
    genre_redrawn: bool = False
    fallbacks: list[str] = field(default_factory=list)


def render_prompt(spec: PromptSpec) -> str:
    """Join the prompt tags, collapsing a mood token equal to the emotion."""
    tokens = [spec.mood_tag, spec.emotion, spec.instrument, spec.genre]
    if spec.mood_tag == spec.emotion:
        tokens = tokens[1:]
    return ", ".join(tokens)


def mood_for_emotion(emotion: str, mapping: MoodMapping, stats: TagStats) -> str:
    """Pick the mood tag for an emotion: highest track count, ties by name."""
    emotion = canonical_emotion(emotion)
    tags = mapping.tags_for(emotion)
    if not tags:
        raise NoMoodForEmotion(f"no mood tag maps to emotion {emotion!r}")
    return min(tags, key=lambda t: (-stats.track_count(t), t))


def _draw_categorical(dist: dict[str, float], u: float) -> str:
    if not dist:
        raise EmptyDistribution("no labels to draw from")
    acc = 0.0
    labels = list(dist)
    for label in labels:
        acc += dist[label]
        if u < acc:
            return label
    return labels[-1]


def transition_rng(policy: TransitionPolicy, step_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=[policy.rng_seed & (2**64 - 1), step_index])
    )


def sample_transition(
    prev: PromptSpec,
    next_emotion: str,
    mapping: MoodMapping,
    stats: TagStats,
    policy: TransitionPolicy,
    step_index: int,
) -> TransitionOutcome:
    """Move the prompt to the next emotional state.

    Mood and emotion always update; instrument and genre are each redrawn
    with probability equal to the temperature, independently, from the new
    mood's conditional distribution. A redraw against a mood with no data
    keeps the previous value and records the fallback.
    """
    next_emotion = canonical_emotion(next_emotion)
    mood = mood_for_emotion(next_emotion, mapping, stats)
    rng = transition_rng(policy, step_index)
    u_switch_i = rng.random()
    u_pick_i = rng.random()
    u_switch_g = rng.random()
    u_pick_g = rng.random()

    outcome = TransitionOutcome(spec=prev)
    instrument = prev.instrument
    if u_switch_i < policy.temperature:
        try:
            instrument = _draw_categorical(stats.instrument_dist(mood), u_pick_i)
            outcome.instrument_redrawn = True
        except EmptyDistribution:
            outcome.fallbacks.append("instrument")
    genre = prev.genre
    if u_switch_g < policy.temperature:
        try:
            genre = _draw_categorical(stats.genre_dist(mood), u_pick_g)
            outcome.genre_redrawn = True
        except EmptyDistribution:
            outcome.fallbacks.append("genre")

    outcome.spec = PromptSpec(
        mood_tag=mood, emotion=next_emotion, instrument=instrument, genre=genre
    )
    return outcome
