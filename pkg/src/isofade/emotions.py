"""Valence-arousal circumplex geometry, mood-tag mapping, and iso path planning.

The 15 emotions live on Russell/Posner's circumplex. Coordinates are the
drawn positions of the standard diagram (circle radius 2.5) normalized to
the unit disc, so valence and arousal are dimensionless in [-1, 1]. The
angular ordering of the 15 points defines a ring; an iso path walks that
ring from the current emotional state toward the desired one along the
shorter arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, TextIO

from .errors import MappingFormatError, UnknownEmotion, UnmappedTag

_TWO_PI = 2.0 * math.pi

# Diagram coordinates before normalization by the circle radius (2.5).
_RAW_COORDS = {
    "alert": (0.5, 2.3),
    "excited": (1.25, 1.8125),
    "elated": (1.75, 1.0625),
    "happy": (1.9, 0.375),
    "contented": (1.8, -0.1875),
    "serene": (1.75, -1.0625),
    "relaxed": (1.25, -1.6875),
    "calm": (0.375, -2.2),
    "bored": (-0.5, -2.1875),
    "depressed": (-1.3625, -1.25),
    "sad": (-2.125, -0.375),
    "upset": (-2.075, 0.1875),
    "stressed": (-1.55, 1.0625),
    "nervous": (-1.05, 1.7125),
    "tense": (-0.4125, 2.2125),
}
_RADIUS = 2.5

CANONICAL_EMOTIONS = tuple(_RAW_COORDS)


@dataclass(frozen=True)
class EmotionPoint:
    """A named emotion with unit-disc valence/arousal coordinates."""

    name: str
    valence: float
    arousal: float

    @property
    def angle(self) -> float:
        """Circumplex angle in radians, normalized to [0, 2*pi)."""
        return math.atan2(self.arousal, self.valence) % _TWO_PI


EMOTION_POINTS: dict[str, EmotionPoint] = {
    name: EmotionPoint(name, x / _RADIUS, y / _RADIUS)
    for name, (x, y) in _RAW_COORDS.items()
}

# Ring order: the 15 emotions sorted by ascending circumplex angle.
EMOTION_RING: tuple[str, ...] = tuple(
    sorted(EMOTION_POINTS, key=lambda n: EMOTION_POINTS[n].angle)
)


def canonical_emotion(name: str) -> str:
    """Normalize an emotion label (case-insensitive) to its canonical form."""
    label = name.strip().lower()
    if label not in EMOTION_POINTS:
        raise UnknownEmotion(f"unknown emotion {name!r}")
    return label


def emotion_coords(name: str) -> EmotionPoint:
    """Return the circumplex point for a canonical emotion label."""
    return EMOTION_POINTS[canonical_emotion(name)]


def angular_distance(a: str, b: str) -> float:
    """Wrapped angular distance between two emotions, radians in [0, pi]."""
    d = abs(emotion_coords(a).angle - emotion_coords(b).angle)
    return min(d, _TWO_PI - d)


def plan_path(start: str, goal: str) -> list[str]:
    """Walk adjacent emotions along the ring from start to goal.

    Takes the arc direction with fewer intermediate states. A tie (possible
    only on rings with an even number of nodes, so never for the canonical
    15) is broken toward the direction whose midpoint emotion has higher
    valence, and toward ascending angle if the midpoints tie as well.
    """
    start = canonical_emotion(start)
    goal = canonical_emotion(goal)
    n = len(EMOTION_RING)
    i = EMOTION_RING.index(start)
    j = EMOTION_RING.index(goal)
    d_ccw = (j - i) % n
    d_cw = (i - j) % n
    if d_ccw < d_cw:
        step, dist = 1, d_ccw
    elif d_cw < d_ccw:
        step, dist = -1, d_cw
    else:
        mid_ccw = EMOTION_POINTS[EMOTION_RING[(i + d_ccw // 2) % n]]
        mid_cw = EMOTION_POINTS[EMOTION_RING[(i - d_cw // 2) % n]]
        step = 1 if mid_ccw.valence >= mid_cw.valence else -1
        dist = d_ccw
    return [EMOTION_RING[(i + k * step) % n] for k in range(dist + 1)]


class MoodMapping:
    """Finite map from lowercase mood/theme tag to canonical emotion label."""

    def __init__(self, entries: dict[str, str]):
        self.entries = dict(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, tag: str) -> bool:
        return tag.strip().lower() in self.entries

    def emotion_for(self, tag: str) -> str:
        key = tag.strip().lower()
        if key not in self.entries:
            raise UnmappedTag(f"mood tag {tag!r} has no emotion mapping")
        return self.entries[key]

    def tags_for(self, emotion: str) -> list[str]:
        emotion = canonical_emotion(emotion)
        return sorted(t for t, e in self.entries.items() if e == emotion)


def map_mood_tag(tag: str, mapping: MoodMapping) -> str:
    """Return the canonical emotion a mood/theme tag maps to."""
    return mapping.emotion_for(tag)


def parse_mood_mapping(lines: Iterable[str] | TextIO) -> MoodMapping:
    """Parse a mapping file: one ``tag<TAB>emotion`` pair per line.

    Blank lines and ``#`` comments are allowed. Malformed rows are rejected
    with their line number.
    """
    entries: dict[str, str] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MappingFormatError(line_no, "expected 'tag<TAB>emotion'")
        tag, emotion = parts[0].strip().lower(), parts[1].strip().lower()
        if not tag:
            raise MappingFormatError(line_no, "empty mood tag")
        if tag in entries:
            raise MappingFormatError(line_no, f"duplicate mood tag {tag!r}")
        if emotion not in EMOTION_POINTS:
            raise MappingFormatError(line_no, f"unknown emotion {emotion!r}")
        entries[tag] = emotion
    return MoodMapping(entries)


def load_mood_mapping(path: str | None = None) -> MoodMapping:
    """Load a mapping file, or the packaged default when path is None."""
    if path is None:
        text = (
            resources.files("isofade.data")
            .joinpath("mood_mapping.tsv")
            .read_text(encoding="utf-8")
        )
        return parse_mood_mapping(text.splitlines())
    with open(path, "r", encoding="utf-8") as fh:
        return parse_mood_mapping(fh)
