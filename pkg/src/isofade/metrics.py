"""Emotion-alignment metrics: Hamming score, average precision, embedding
cosine relevance, Fleiss' kappa, and the circumplex emotion-match check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .emotions import MoodMapping, angular_distance, canonical_emotion
from .errors import (
    DimMismatch,
    InvalidRatings,
    LengthMismatch,
    NoMappableTags,
    NoPositives,
    ZeroVector,
)


def hamming_score(
    truth: Sequence[int], scores: Sequence[float], threshold: float = 0.5
) -> float:
    """Fraction of label positions where thresholded scores match the truth.

    Equals 1 minus the Hamming loss.
    """
    t = np.asarray(truth)
    s = np.asarray(scores, dtype=np.float64)
    if t.shape != s.shape or t.ndim != 1 or t.size == 0:
        raise LengthMismatch(f"truth {t.shape} vs scores {s.shape}")
    predictions = s >= threshold
    return float(np.mean(predictions == t.astype(bool)))


def multilabel_accuracy(
    truth: Sequence[int], scores: Sequence[float], threshold: float = 0.5
) -> float:
    """Intersection-over-union multilabel accuracy (Jaccard variant).

    Kept distinct from :func:`hamming_score`; both pairs of conventions
    circulate under the name "accuracy" in autotagging work. Defined as 1
    when neither truth nor prediction has any positive label.
    """
    t = np.asarray(truth).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if t.shape != s.shape or t.ndim != 1 or t.size == 0:
        raise LengthMismatch(f"truth {t.shape} vs scores {s.shape}")
    p = s >= threshold
    union = np.logical_or(t, p).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(t, p).sum() / union)


def auprc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Average precision: mean of precision@rank over the positive items.

    Items are ranked by descending score; ties keep their input order.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise LengthMismatch(f"scores {s.shape} vs labels {y.shape}")
    n_pos = int(np.sum(y != 0))
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive label")
    order = sorted(range(len(s)), key=lambda i: (-s[i], i))
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if y[idx]:
            hits += 1
            total += hits / rank
    return total / n_pos


def clap_style_score(
    audio_emb: Sequence[float], text_emb: Sequence[float]
) -> float:
    """100 times the cosine similarity of two embedding vectors."""
    a = np.asarray(audio_emb, dtype=np.float64)
    b = np.asarray(text_emb, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimMismatch(f"audio {a.shape} vs text {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("embeddings must be nonzero")
    return float(100.0 * np.dot(a, b) / (na * nb))


def fleiss_kappa(counts: Sequence[Sequence[int]]) -> float:
    """Fleiss' chance-corrected multi-rater agreement.

    `counts` has one row per subject and one column per category; each cell
    is the number of raters assigning that category, and every row must sum
    to the same rater count n >= 2. When all ratings land in a single
    category the chance agreement is 1 and kappa is undefined; the
    documented sentinel NaN is returned.
    """
    table = np.asarray(counts, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 1:
        raise InvalidRatings("need a 2-D matrix with at least 2 subjects")
    if np.any(table < 0) or np.any(table != np.floor(table)):
        raise InvalidRatings("counts must be nonnegative integers")
    row_sums = table.sum(axis=1)
    n = row_sums[0]
    if n < 2 or np.any(row_sums != n):
        raise InvalidRatings("every subject needs the same rater count n >= 2")

    p_subject = (np.sum(table * table, axis=1) - n) / (n * (n - 1.0))
    p_bar = float(np.mean(p_subject))
    p_category = table.sum(axis=0) / table.sum()
    p_expected = float(np.sum(p_category * p_category))
    if p_expected >= 1.0:
        return math.nan
    return (p_bar - p_expected) / (1.0 - p_expected)


def kappa_band(kappa: float) -> str:
    """Landis-Koch qualitative band for a kappa value."""
    if kappa != kappa:
        return "undefined (single category)"
    if kappa < 0.0:
        return "poor"
    if kappa <= 0.20:
        return "slight"
    if kappa <= 0.40:
        return "fair"
    if kappa <= 0.60:
        return "moderate"
    if kappa <= 0.80:
        return "substantial"
    return "almost perfect"


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    angular_error_deg: float
    best_tag: str
    best_emotion: str


def emotion_match(
    classifier_probs: dict[str, float],
    intended: str,
    mapping: MoodMapping,
    top_m: int = 3,
    tolerance_deg: float = 45.0,
) -> MatchResult:
    """Check the classifier's top tags against the intended emotion.

    The top_m tags by probability are mapped through the mood mapping
    (unmapped tags skipped); the verdict is a match when any mapped emotion
    lies within tolerance_deg of the intended emotion on the circumplex.
    Returns the minimum angular error over the mapped candidates.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    intended = canonical_emotion(intended)
    ranked = sorted(classifier_probs.items(), key=lambda kv: (-kv[1], kv[0]))
    best: tuple[float, str, str] | None = None
    for tag, _prob in ranked[:top_m]:
        if tag.strip().lower() not in mapping:
            continue
        emotion = mapping.emotion_for(tag)
        error = math.degrees(angular_distance(emotion, intended))
        if best is None or error < best[0]:
            best = (error, tag, emotion)
    if best is None:
        raise NoMappableTags(
            f"none of the top {top_m} tags map to a circumplex emotion"
        )
    error, tag, emotion = best
    return MatchResult(error <= tolerance_deg, error, tag, emotion)
