#!/usr/bin/env python3
"""Generate the synthetic MTG-Jamendo-layout excerpt and default stats.

The excerpt mimics the public autotagging_moodtheme metadata layout
(TRACK_ID, ARTIST_ID, ALBUM_ID, PATH, DURATION, then category---value
tags) with 1,000 deterministic synthetic rows. Instrument and genre
choices are biased per mood group so the conditional distributions are
non-uniform, like the real data. Writes:

  tests/data/autotagging_moodtheme_excerpt.tsv
  src/isofade/data/default_tag_stats.json
"""

import pathlib
import sys

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from isofade.jamendo import compute_tag_stats, dump_tag_stats, parse_jamendo_tsv  # noqa: E402

MOODS = [
    "action", "adventure", "advertising", "background", "ballad", "calm",
    "children", "christmas", "commercial", "cool", "corporate", "dark",
    "deep", "documentary", "drama", "dramatic", "dream", "emotional",
    "energetic", "epic", "fast", "film", "fun", "funny", "game", "groovy",
    "happy", "heavy", "holiday", "hopeful", "inspiring", "love",
    "meditative", "melancholic", "melodic", "motivational", "movie",
    "nature", "party", "positive", "powerful", "relaxing", "retro",
    "romantic", "sad", "sexy", "slow", "soft", "soundscape", "space",
    "sport", "summer", "trailer", "travel", "upbeat", "uplifting",
]

INSTRUMENTS = [
    "accordion", "acousticguitar", "bass", "bell", "brass", "cello",
    "clarinet", "classicalguitar", "computer", "drummachine", "drums",
    "electricguitar", "electricpiano", "flute", "guitar", "harp",
    "keyboard", "orchestra", "organ", "pad", "percussion", "piano",
    "rhodes", "saxophone", "strings", "synthesizer", "trumpet", "violin",
    "voice",
]

GENRES = [
    "alternative", "ambient", "atmospheric", "blues", "chillout",
    "classical", "dance", "downtempo", "easylistening", "electronic",
    "folk", "funk", "hiphop", "house", "indie", "jazz", "lounge", "metal",
    "newage", "orchestral", "pop", "poprock", "reggae", "rock", "soul",
    "soundtrack", "techno", "trance", "triphop", "world",
]

# Soft affinity groups: quiet moods prefer quiet instruments/genres.
QUIET_MOODS = {
    "background", "calm", "cool", "deep", "dream", "meditative", "nature",
    "relaxing", "romantic", "sexy", "slow", "soft", "soundscape", "space",
}
DARK_MOODS = {"dark", "ballad", "documentary", "drama", "emotional",
              "heavy", "melancholic", "sad"}
BRIGHT_MOODS = {"action", "adventure", "energetic", "fast", "fun", "game",
                "groovy", "happy", "party", "sport", "summer", "upbeat"}

QUIET_INSTR = ["piano", "strings", "pad", "harp", "flute", "acousticguitar",
               "cello", "rhodes"]
DARK_INSTR = ["cello", "piano", "violin", "organ", "electricguitar", "voice"]
BRIGHT_INSTR = ["drums", "electricguitar", "synthesizer", "bass", "trumpet",
                "drummachine", "percussion"]
QUIET_GENRES = ["ambient", "chillout", "newage", "downtempo", "classical",
                "lounge", "atmospheric"]
DARK_GENRES = ["classical", "metal", "blues", "soundtrack", "triphop"]
BRIGHT_GENRES = ["pop", "rock", "dance", "electronic", "funk", "house"]


def pick(rng, base, biased, p_bias):
    if rng.random() < p_bias:
        return biased[rng.integers(len(biased))]
    return base[rng.integers(len(base))]


def main() -> None:
    rng = np.random.default_rng(202406)
    rows = []
    mood_weights = rng.dirichlet(np.full(len(MOODS), 1.2))
    for i in range(1000):
        track = 200000 + int(rng.integers(0, 800000))
        artist = int(rng.integers(0, 60000))
        album = int(rng.integers(0, 90000))
        duration = round(float(rng.uniform(45.0, 540.0)), 1)
        path = f"{track % 100:02d}/{track}.mp3"

        n_moods = 1 if rng.random() < 0.85 else 2
        moods = list(rng.choice(MOODS, size=n_moods, replace=False, p=mood_weights))
        lead = moods[0]
        if lead in QUIET_MOODS:
            bi, bg = QUIET_INSTR, QUIET_GENRES
        elif lead in DARK_MOODS:
            bi, bg = DARK_INSTR, DARK_GENRES
        elif lead in BRIGHT_MOODS:
            bi, bg = BRIGHT_INSTR, BRIGHT_GENRES
        else:
            bi, bg = INSTRUMENTS, GENRES

        tags = [f"mood/theme---{m}" for m in moods]
        n_instr = int(rng.choice([0, 1, 2, 3], p=[0.15, 0.45, 0.3, 0.1]))
        chosen = set()
        while len(chosen) < n_instr:
            chosen.add(pick(rng, INSTRUMENTS, bi, 0.7))
        tags += [f"instrument---{v}" for v in sorted(chosen)]
        n_genre = int(rng.choice([1, 2], p=[0.7, 0.3]))
        chosen_g = set()
        while len(chosen_g) < n_genre:
            chosen_g.add(pick(rng, GENRES, bg, 0.7))
        tags += [f"genre---{v}" for v in sorted(chosen_g)]

        rows.append(
            f"track_{track:07d}\tartist_{artist:06d}\talbum_{album:06d}\t"
            f"{path}\t{duration}\t" + "\t".join(tags)
        )

    tsv = "TRACK_ID\tARTIST_ID\tALBUM_ID\tPATH\tDURATION\tTAGS\n" + "\n".join(rows) + "\n"
    out_tsv = ROOT / "tests" / "data" / "autotagging_moodtheme_excerpt.tsv"
    out_tsv.parent.mkdir(parents=True, exist_ok=True)
    out_tsv.write_text(tsv, encoding="utf-8")

    report = parse_jamendo_tsv(tsv.splitlines())
    assert not report.errors, report.errors
    stats = compute_tag_stats(report.records)
    out_stats = ROOT / "src" / "isofade" / "data" / "default_tag_stats.json"
    out_stats.write_text(dump_tag_stats(stats), encoding="utf-8")
    print(f"wrote {out_tsv} ({len(report.records)} records)")
    print(f"wrote {out_stats} ({len(stats.per_mood)} moods)")


if __name__ == "__main__":
    main()
