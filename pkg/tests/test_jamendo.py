"""TSV parsing and conditional tag statistics tests."""

import pathlib
import random

import pytest

from isofade.errors import MalformedLine, UnsupportedFormat
from isofade.jamendo import (
    TrackRecord,
    compute_tag_stats,
    dump_tag_stats,
    parse_jamendo_tsv,
    parse_tag_stats,
)

DATA = pathlib.Path(__file__).parent / "data"
HEADER = "TRACK_ID\tARTIST_ID\tALBUM_ID\tPATH\tDURATION\tTAGS"


def make_record(track_id, mood=None, instruments=(), genres=()):
    tags = []
    if mood:
        moods = mood if isinstance(mood, (list, tuple)) else [mood]
        tags += [("mood/theme", m) for m in moods]
    tags += [("instrument", v) for v in instruments]
    tags += [("genre", v) for v in genres]
    return TrackRecord(track_id, 180.0, tags)


class TestParse:
    def test_layout_example(self):
        line = "t1\ta1\tal1\t48/948.mp3\t212.6\tmood/theme---happy\tgenre---pop"
        report = parse_jamendo_tsv([HEADER, line])
        assert not report.errors
        (record,) = report.records
        assert record.track_id == "t1"
        assert record.duration_s == pytest.approx(212.6)
        assert record.tags == [("mood/theme", "happy"), ("genre", "pop")]

    def test_empty_after_header(self):
        assert parse_jamendo_tsv([HEADER]).records == []

    def test_short_line_is_malformed(self):
        report = parse_jamendo_tsv([HEADER, "a\tb\tc\td"])
        assert report.records == []
        assert len(report.errors) == 1
        assert report.errors[0].line_no == 2

    def test_tag_without_separator_is_malformed(self):
        report = parse_jamendo_tsv(
            [HEADER, "t1\ta\tb\tp.mp3\t10.0\tmood/theme happy"]
        )
        assert report.records == []
        assert report.errors[0].line_no == 2

    def test_bad_duration_is_malformed(self):
        report = parse_jamendo_tsv(
            [HEADER, "t1\ta\tb\tp.mp3\tlong\tmood/theme---happy"]
        )
        assert report.errors and report.errors[0].line_no == 2

    def test_unknown_category_dropped_with_count(self):
        report = parse_jamendo_tsv(
            [HEADER, "t1\ta\tb\tp.mp3\t10.0\tcolor---blue\tgenre---pop"]
        )
        assert report.dropped_tags == 1
        assert report.records[0].tags == [("genre", "pop")]

    def test_missing_header_is_fatal(self):
        with pytest.raises(MalformedLine):
            parse_jamendo_tsv(["t1\ta\tb\tp.mp3\t10.0\tgenre---pop"])

    def test_errors_do_not_stop_later_lines(self):
        report = parse_jamendo_tsv(
            [
                HEADER,
                "bad line",
                "t2\ta\tb\tp.mp3\t10.0\tmood/theme---calm",
            ]
        )
        assert [r.track_id for r in report.records] == ["t2"]
        assert report.errors[0].line_no == 2


class TestStats:
    def test_single_instrument(self):
        records = [
            make_record("t1", "happy", ["piano"]),
            make_record("t2", "happy", ["piano"]),
        ]
        stats = compute_tag_stats(records)
        assert stats.instrument_dist("happy") == {"piano": 1.0}

    def test_symmetric_split(self):
        records = [
            make_record("t1", "happy", ["piano"]),
            make_record("t2", "happy", ["guitar"]),
        ]
        dist = compute_tag_stats(records).instrument_dist("happy")
        assert dist == {"guitar": 0.5, "piano": 0.5}

    def test_denominator_semantics_on_three_track_fixture(self):
        # t1 carries two instrument tags, t3 carries none: numerators count
        # tag occurrences, the track-frequency denominator counts only
        # tracks that have at least one instrument tag.
        records = [
            make_record("t1", "happy", ["piano", "guitar"]),
            make_record("t2", "happy", ["piano"]),
            make_record("t3", "happy"),
        ]
        stats = compute_tag_stats(records)
        entry = stats.per_mood["happy"]
        assert entry.track_count == 3
        assert entry.instruments.support == 2
        assert entry.instruments.counts == {"piano": 2, "guitar": 1}
        assert entry.instruments.freq() == {"guitar": 0.5, "piano": 1.0}
        dist = entry.instruments.dist()
        assert dist == {"guitar": pytest.approx(1 / 3), "piano": pytest.approx(2 / 3)}
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)
        assert entry.genres.dist() == {}

    def test_mood_with_no_category_data_gets_empty_dist(self):
        stats = compute_tag_stats([make_record("t1", "dark")])
        assert stats.instrument_dist("dark") == {}
        assert stats.genre_dist("dark") == {}
        assert stats.track_count("dark") == 1

    def test_duplicate_tag_on_one_track_counts_once(self):
        record = TrackRecord(
            "t1", 10.0,
            [("mood/theme", "happy"), ("instrument", "piano"),
             ("instrument", "piano")],
        )
        stats = compute_tag_stats([record])
        assert stats.per_mood["happy"].instruments.counts == {"piano": 1}

    def test_order_independence(self):
        report = parse_jamendo_tsv(
            (DATA / "autotagging_moodtheme_excerpt.tsv").read_text().splitlines()
        )
        shuffled = list(report.records)
        random.Random(13).shuffle(shuffled)
        assert dump_tag_stats(compute_tag_stats(report.records)) == dump_tag_stats(
            compute_tag_stats(shuffled)
        )

    def test_all_frequencies_positive(self):
        report = parse_jamendo_tsv(
            (DATA / "autotagging_moodtheme_excerpt.tsv").read_text().splitlines()
        )
        stats = compute_tag_stats(report.records)
        for mood in stats.moods():
            for dist in (stats.instrument_dist(mood), stats.genre_dist(mood)):
                assert all(v > 0 for v in dist.values())


class TestRoundTrip:
    def test_round_trip_bit_exact(self):
        report = parse_jamendo_tsv(
            (DATA / "autotagging_moodtheme_excerpt.tsv").read_text().splitlines()
        )
        stats = compute_tag_stats(report.records)
        text = dump_tag_stats(stats)
        reloaded = parse_tag_stats(text)
        assert dump_tag_stats(reloaded) == text
        for mood in stats.moods():
            assert reloaded.instrument_dist(mood) == stats.instrument_dist(mood)
            assert reloaded.genre_dist(mood) == stats.genre_dist(mood)
            assert reloaded.track_count(mood) == stats.track_count(mood)

    def test_version_checked(self):
        with pytest.raises(UnsupportedFormat):
            parse_tag_stats('{"format_version": 99, "moods": {}}')
        with pytest.raises(UnsupportedFormat):
            parse_tag_stats("not json")


class TestExcerptFixture:
    def test_excerpt_parses_and_distributions_sum_to_one(self):
        text = (DATA / "autotagging_moodtheme_excerpt.tsv").read_text()
        assert len(text.splitlines()) == 1001  # header + 1,000 rows
        report = parse_jamendo_tsv(text.splitlines())
        assert not report.errors
        assert len(report.records) == 1000
        stats = compute_tag_stats(report.records)
        assert len(stats.per_mood) >= 40
        for mood in stats.moods():
            for dist in (stats.instrument_dist(mood), stats.genre_dist(mood)):
                if dist:
                    assert abs(sum(dist.values()) - 1.0) <= 1e-9
