"""MTG-Jamendo mood/theme metadata parsing and conditional tag statistics.

The autotagging_moodtheme TSV layout: a header line starting with TRACK_ID,
then one track per line with at least 6 tab-separated fields
(TRACK_ID, ARTIST_ID, ALBUM_ID, PATH, DURATION, TAGS...). Fields 6 and
beyond are tags of the form ``category---value`` with category one of
genre, instrument, mood/theme.

Statistics are conditional on mood: for every mood tag we keep the
instrument and genre occurrence counts over tracks carrying that mood.
Two views are exposed per category:

* ``dist``  - occurrence counts normalized to sum to 1; this is the
  categorical distribution used for sampling prompt transitions.
* ``freq``  - per-track tag frequency count/support, where support is the
  number of tracks (with this mood) having at least one tag of the
  category. A track with several instrument tags counts once per tag in
  the numerator and once in the support, so these values may sum above 1.

The stats file stores integer counts plus a format version, so reloading
reproduces distributions bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import MalformedLine, UnsupportedFormat

STATS_FORMAT_VERSION = 1

_KNOWN_CATEGORIES = ("genre", "instrument", "mood/theme")


@dataclass
class TrackRecord:
    track_id: str
    duration_s: float
    tags: list[tuple[str, str]]

    def values(self, category: str) -> list[str]:
        """Distinct tag values of one category, in first-seen order."""
        seen: dict[str, None] = {}
        for cat, val in self.tags:
            if cat == category:
                seen.setdefault(val, None)
        return list(seen)


@dataclass
class ParseReport:
    records: list[TrackRecord] = field(default_factory=list)
    errors: list[MalformedLine] = field(default_factory=list)
    dropped_tags: int = 0


def parse_jamendo_tsv(stream: Iterable[str] | IO[str]) -> ParseReport:
    """Parse the TSV, accumulating malformed-line errors instead of failing.

    A missing or foreign header is fatal; bad data lines are recorded with
    their line number and contribute no records.
    """
    report = ParseReport()
    lines = iter(stream)
    try:
        header = next(lines)
    except StopIteration:
        raise MalformedLine(1, "empty input, expected a TRACK_ID header")
    if not header.startswith("TRACK_ID"):
        raise MalformedLine(1, "header must begin with TRACK_ID")

    for line_no, raw in enumerate(lines, start=2):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) < 6:
            report.errors.append(
                MalformedLine(line_no, f"expected >= 6 fields, got {len(fields)}")
            )
            continue
        track_id = fields[0].strip()
        if not track_id:
            report.errors.append(MalformedLine(line_no, "empty TRACK_ID"))
            continue
        try:
            duration = float(fields[4])
        except ValueError:
            report.errors.append(
                MalformedLine(line_no, f"bad DURATION {fields[4]!r}")
            )
            continue
        if duration < 0:
            report.errors.append(MalformedLine(line_no, "negative DURATION"))
            continue

        tags: list[tuple[str, str]] = []
        bad_tag = None
        for tag in fields[5:]:
            tag = tag.strip()
            if not tag:
                continue
            if "---" not in tag:
                bad_tag = tag
                break
            category, value = tag.split("---", 1)
            if category not in _KNOWN_CATEGORIES:
                report.dropped_tags += 1
                continue
            tags.append((category, value.strip().lower()))
        if bad_tag is not None:
            report.errors.append(
                MalformedLine(line_no, f"tag {bad_tag!r} lacks '---' separator")
            )
            continue
        report.records.append(TrackRecord(track_id, duration, tags))
    return report


@dataclass
class CategoryStats:
    """Occurrence counts for one tag category conditioned on a mood."""

    counts: dict[str, int] = field(default_factory=dict)
    support: int = 0  # tracks with >= 1 tag of this category

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def dist(self) -> dict[str, float]:
        """Sampling distribution: counts normalized to sum to 1."""
        total = self.total
        if total == 0:
            return {}
        return {label: c / total for label, c in sorted(self.counts.items())}

    def freq(self) -> dict[str, float]:
        """Per-track frequency: count / support (may sum above 1)."""
        if self.support == 0:
            return {}
        return {label: c / self.support for label, c in sorted(self.counts.items())}


@dataclass
class MoodStats:
    track_count: int = 0
    instruments: CategoryStats = field(default_factory=CategoryStats)
    genres: CategoryStats = field(default_factory=CategoryStats)


class TagStats:
    """Per-mood conditional instrument/genre statistics."""

    def __init__(self, per_mood: dict[str, MoodStats] | None = None):
        self.per_mood: dict[str, MoodStats] = per_mood or {}

    def moods(self) -> list[str]:
        return sorted(self.per_mood)

    def track_count(self, mood: str) -> int:
        entry = self.per_mood.get(mood)
        return entry.track_count if entry else 0

    def instrument_dist(self, mood: str) -> dict[str, float]:
        entry = self.per_mood.get(mood)
        return entry.instruments.dist() if entry else {}

    def genre_dist(self, mood: str) -> dict[str, float]:
        entry = self.per_mood.get(mood)
        return entry.genres.dist() if entry else {}


def compute_tag_stats(records: list[TrackRecord]) -> TagStats:
    """Build per-mood instrument/genre statistics from parsed records."""
    per_mood: dict[str, MoodStats] = {}
    for record in records:
        moods = record.values("mood/theme")
        if not moods:
            continue
        instruments = record.values("instrument")
        genres = record.values("genre")
        for mood in moods:
            entry = per_mood.setdefault(mood, MoodStats())
            entry.track_count += 1
            if instruments:
                entry.instruments.support += 1
                for v in instruments:
                    entry.instruments.counts[v] = entry.instruments.counts.get(v, 0) + 1
            if genres:
                entry.genres.support += 1
                for v in genres:
                    entry.genres.counts[v] = entry.genres.counts.get(v, 0) + 1
    return TagStats(per_mood)


def dump_tag_stats(stats: TagStats) -> str:
    """Serialize stats to the versioned JSON text format."""
    doc = {
        "format_version": STATS_FORMAT_VERSION,
        "moods": {
            mood: {
                "track_count": entry.track_count,
                "instruments": {
                    "support": entry.instruments.support,
                    "counts": dict(sorted(entry.instruments.counts.items())),
                },
                "genres": {
                    "support": entry.genres.support,
                    "counts": dict(sorted(entry.genres.counts.items())),
                },
            }
            for mood, entry in sorted(stats.per_mood.items())
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_tag_stats(text: str) -> TagStats:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnsupportedFormat(f"stats file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != STATS_FORMAT_VERSION:
        raise UnsupportedFormat(
            f"expected stats format_version {STATS_FORMAT_VERSION}, "
            f"got {doc.get('format_version')!r}"
        )
    per_mood: dict[str, MoodStats] = {}
    for mood, entry in doc.get("moods", {}).items():
        per_mood[mood] = MoodStats(
            track_count=int(entry["track_count"]),
            instruments=CategoryStats(
                counts={k: int(v) for k, v in entry["instruments"]["counts"].items()},
                support=int(entry["instruments"]["support"]),
            ),
            genres=CategoryStats(
                counts={k: int(v) for k, v in entry["genres"]["counts"].items()},
                support=int(entry["genres"]["support"]),
            ),
        )
    return TagStats(per_mood)


def save_tag_stats(stats: TagStats, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_tag_stats(stats))


def load_tag_stats(path: str | None = None) -> TagStats:
    """Load a stats file, or the packaged default when path is None."""
    if path is None:
        from importlib import resources

        text = (
            resources.files("isofade.data")
            .joinpath("default_tag_stats.json")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_tag_stats(text)
