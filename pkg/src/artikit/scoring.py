"""Pronunciation scores: the posterior log-ratio model score, the combined
expert score from Likert ratings, and the shared binary decision rule.

The model score for an input with expected class y and competing class c is
``ln p(y|x) - ln p(c|x)``; when no competitor is given, the highest-posterior
class other than y is used, which yields the most pessimistic score.
Positive scores prefer the expected class; ``binarize`` maps score s and
threshold k to 1 (error) iff s <= k.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classes import CLASSES, CLASS_INDEX, require_class
from .errors import RatingValidationError

# posterior floor before taking logs; caps |score| around 27.6 instead of inf
PROBABILITY_FLOOR = 1e-12

LIKERT_MIN, LIKERT_MAX = 1, 5
SECONDARY_THRESHOLD = 3   # primary <= 3 requires a secondary score


def _check_posterior(post) -> np.ndarray:
    p = np.asarray(post, dtype=np.float64)
    if p.shape != (len(CLASSES),):
        raise ValueError(f"posterior must have shape ({len(CLASSES)},), got {p.shape}")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("posterior entries must be nonnegative and sum to 1 within 1e-6")
    return p


def model_score(post, expected: str, competing: str | None = None) -> tuple[float, str]:
    """GOP-style log posterior ratio; returns (score, competing class used)."""
    p = _check_posterior(post)
    require_class(expected)
    if competing is not None:
        require_class(competing)
        if competing == expected:
            raise ValueError("expected and competing classes must differ")
    else:
        masked = p.copy()
        masked[CLASS_INDEX[expected]] = -1.0
        competing = CLASSES[int(np.argmax(masked))]
    s = (math.log(max(p[CLASS_INDEX[expected]], PROBABILITY_FLOOR))
         - math.log(max(p[CLASS_INDEX[competing]], PROBABILITY_FLOOR)))
    return s, competing


@dataclass(frozen=True)
class ExpertRating:
    """One annotator's Likert scores for one phone instance."""

    primary: int
    secondary: int | None = None
    comment: str | None = None

    def validate(self) -> "ExpertRating":
        if self.primary not in range(LIKERT_MIN, LIKERT_MAX + 1):
            raise RatingValidationError(f"primary score must be in 1..5, got {self.primary}")
        if self.secondary is not None and self.secondary not in range(LIKERT_MIN, LIKERT_MAX + 1):
            raise RatingValidationError(f"secondary score must be in 1..5, got {self.secondary}")
        if self.primary <= SECONDARY_THRESHOLD and self.secondary is None:
            raise RatingValidationError(f"primary {self.primary} requires a secondary score")
        if self.primary > SECONDARY_THRESHOLD and self.secondary is not None:
            raise RatingValidationError(f"primary {self.primary} forbids a secondary score")
        return self


def combined_expert_score(rating: ExpertRating) -> float:
    """ln(primary) - ln(secondary); a missing secondary counts as 1."""
    rating.validate()
    secondary = 1 if rating.secondary is None else rating.secondary
    return math.log(rating.primary) - math.log(secondary)


def binarize(s: float, k: float = 0.0) -> int:
    """Binary error decision: 0 (correct) iff s > k, else 1 (error)."""
    if not math.isfinite(s):
        raise ValueError(f"score must be finite, got {s}")
    return 0 if s > k else 1


def clear_case_label(rating: ExpertRating) -> int | None:
    """Binary expert label for unambiguous ratings, else None.

    Correct productions (primary 4-5) map to 0; clear substitutions
    (primary 1-2 with secondary 4-5) map to 1.
    """
    rating.validate()
    if rating.primary >= 4:
        return 0
    if rating.primary <= 2 and rating.secondary is not None and rating.secondary >= 4:
        return 1
    return None


def select_clear_cases(ratings):
    """Filter to unambiguous ratings.

    Accepts an iterable of ExpertRating or (key, ExpertRating) pairs;
    returns (kept, excluded_count) where kept pairs each input with its
    binary expert label.
    """
    kept = []
    excluded = 0
    for item in ratings:
        rating = item[1] if isinstance(item, tuple) else item
        label = clear_case_label(rating)
        if label is None:
            excluded += 1
        else:
            kept.append((item, label))
    return kept, excluded


@dataclass
class ScoreRecord:
    """One scored phone instance, with model and (optional) expert sides."""

    utt_id: str
    phone_index: int
    speaker: str
    expected: str
    competing: str
    s_m: float
    k: float = 0.0
    s_c: float | None = None
    b_expert: int | None = None

    @property
    def b_model(self) -> int:
        return binarize(self.s_m, self.k)


SCORE_CSV_FIELDS = ("utt_id", "phone_index", "speaker", "expected", "competing",
                    "s_m", "s_c", "k", "b_model", "b_expert")


def write_score_csv(path: Path, records: list[ScoreRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORE_CSV_FIELDS)
        for r in records:
            writer.writerow([
                r.utt_id, r.phone_index, r.speaker, r.expected, r.competing,
                repr(r.s_m), "" if r.s_c is None else repr(r.s_c), repr(r.k),
                r.b_model, "" if r.b_expert is None else r.b_expert,
            ])


def read_score_csv(path: Path) -> list[ScoreRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(ScoreRecord(
                utt_id=row["utt_id"],
                phone_index=int(row["phone_index"]),
                speaker=row["speaker"],
                expected=row["expected"],
                competing=row["competing"],
                s_m=float(row["s_m"]),
                s_c=float(row["s_c"]) if row["s_c"] else None,
                k=float(row["k"]),
                b_expert=int(row["b_expert"]) if row["b_expert"] else None,
            ))
    return records
