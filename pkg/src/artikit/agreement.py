"""Inter- and intra-annotator reliability statistics.

Krippendorff's alpha runs on the coincidence-matrix formulation with
nominal, ordinal, or interval difference functions and tolerates missing
cells (items rated by fewer than two annotators are dropped). Cohen's
kappa covers pairwise agreement, including the intra-annotator diagonal of
the pairwise grid built from duplicate ratings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError, UndefinedStatisticError

SCALES = ("nominal", "ordinal", "interval")

# Landis & Koch bands for kappa
KAPPA_BANDS = (
    (0.0, "poor"),
    (0.2, "slight"),
    (0.4, "fair"),
    (0.6, "moderate"),
    (0.8, "substantial"),
    (1.0, "almost perfect"),
)

BAND_COLORS = {
    "poor": "#d73027",
    "slight": "#fc8d59",
    "fair": "#fee090",
    "moderate": "#e0f3f8",
    "substantial": "#91bfdb",
    "almost perfect": "#4575b4",
}


def kappa_band(kappa: float) -> str:
    for upper, label in KAPPA_BANDS:
        if kappa <= upper:
            return label
    return KAPPA_BANDS[-1][1]


def alpha_band(alpha: float) -> str:
    if alpha > 0.8:
        return "reliable"
    if alpha >= 0.667:
        return "moderately reliable"
    return "unreliable"


@dataclass
class AgreementResult:
    statistic: float
    n_items: int
    band: str


def _item_values(matrix) -> list[list]:
    """Per-item rating lists from an annotators x items grid with None gaps."""
    rows = [list(r) for r in matrix]
    if not rows:
        return []
    n_items = len(rows[0])
    if any(len(r) != n_items for r in rows):
        raise ValueError("all annotator rows must have the same item count")
    items = []
    for j in range(n_items):
        vals = [rows[i][j] for i in range(len(rows)) if rows[i][j] is not None]
        items.append(vals)
    return items


def _difference_matrix(values: list, scale: str, marginals: np.ndarray) -> np.ndarray:
    v = len(values)
    delta = np.zeros((v, v))
    if scale == "nominal":
        delta = 1.0 - np.eye(v)
    elif scale == "interval":
        arr = np.asarray(values, dtype=np.float64)
        delta = (arr[:, None] - arr[None, :]) ** 2
    elif scale == "ordinal":
        # delta(c,k) = (sum of marginals from rank c..k, minus half of the
        # endpoint marginals) squared
        cum = np.concatenate([[0.0], np.cumsum(marginals)])
        for c in range(v):
            for k in range(v):
                lo, hi = min(c, k), max(c, k)
                span = cum[hi + 1] - cum[lo]
                delta[c, k] = (span - (marginals[c] + marginals[k]) / 2.0) ** 2
    else:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
    return delta


def krippendorff_alpha(matrix, scale: str = "nominal") -> AgreementResult:
    """Alpha over an annotators x items grid (None marks a missing cell).

    Raises DegenerateDataError when every pairable rating holds the same
    value (expected disagreement zero, alpha undefined).
    """
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
    items = [vals for vals in _item_values(matrix) if len(vals) >= 2]
    if not items:
        raise ValueError("alpha needs at least one item with two or more ratings")

    if scale == "nominal":
        domain = sorted({v for vals in items for v in vals}, key=lambda x: (str(type(x)), x))
    else:
        domain = sorted({float(v) for vals in items for v in vals})
    index = {v: i for i, v in enumerate(domain)}
    v = len(domain)

    coincidence = np.zeros((v, v))
    for vals in items:
        m = len(vals)
        counts = np.zeros(v)
        for val in vals:
            counts[index[val if scale == "nominal" else float(val)]] += 1
        pairs = np.outer(counts, counts) - np.diag(counts)
        coincidence += pairs / (m - 1)

    marginals = coincidence.sum(axis=1)
    n = marginals.sum()
    delta = _difference_matrix(domain, scale, marginals)
    d_observed = (coincidence * delta).sum() / n
    d_expected = (np.outer(marginals, marginals) * delta).sum() / (n * (n - 1))
    if d_expected == 0.0:
        raise DegenerateDataError("all ratings share one value; expected disagreement is zero")
    alpha = 1.0 - d_observed / d_expected
    return AgreementResult(statistic=float(alpha), n_items=len(items), band=alpha_band(alpha))


def cohen_kappa(a, b) -> AgreementResult:
    """Chance-corrected agreement between two equal-length category sequences."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise ValueError(f"rating sequences differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("rating sequences must be nonempty")
    n = len(a)
    p_observed = sum(x == y for x, y in zip(a, b)) / n
    categories = sorted(set(a) | set(b), key=lambda x: (str(type(x)), x))
    p_expected = sum((a.count(c) / n) * (b.count(c) / n) for c in categories)
    if p_expected == 1.0:
        raise UndefinedStatisticError(
            "kappa undefined: both raters constant with the same value", flag="perfect-constant")
    kappa = (p_observed - p_expected) / (1.0 - p_expected)
    return AgreementResult(statistic=float(kappa), n_items=n, band=kappa_band(kappa))


def pairwise_kappa_grid(first_ratings: dict, duplicate_pairs: dict) -> dict:
    """Kappa grid: off-diagonal pairs on common items, diagonal on duplicates.

    ``first_ratings`` maps annotator -> {item: value} (first occurrences);
    ``duplicate_pairs`` maps annotator -> list of (first, second) values.
    Cells without common items or duplicates, or with undefined kappa, are
    marked absent with a reason.
    """
    annotators = sorted(first_ratings)
    cells = {}
    for i, a in enumerate(annotators):
        for j, b in enumerate(annotators):
            if i == j:
                pairs = duplicate_pairs.get(a, [])
                if not pairs:
                    cells[(a, b)] = {"kappa": None, "reason": "no duplicate ratings"}
                    continue
                seq_a = [p[0] for p in pairs]
                seq_b = [p[1] for p in pairs]
            else:
                common = sorted(set(first_ratings[a]) & set(first_ratings[b]))
                if not common:
                    cells[(a, b)] = {"kappa": None, "reason": "no common items"}
                    continue
                seq_a = [first_ratings[a][item] for item in common]
                seq_b = [first_ratings[b][item] for item in common]
            try:
                result = cohen_kappa(seq_a, seq_b)
            except UndefinedStatisticError as exc:
                cells[(a, b)] = {"kappa": None, "reason": exc.flag}
                continue
            cells[(a, b)] = {
                "kappa": result.statistic,
                "n": result.n_items,
                "band": result.band,
                "color": BAND_COLORS[result.band],
            }
    return {"annotators": annotators, "cells": cells}


def grid_to_json(grid: dict) -> dict:
    """JSON-serializable form of a pairwise kappa grid."""
    return {
        "annotators": grid["annotators"],
        "cells": {f"{a}|{b}": cell for (a, b), cell in grid["cells"].items()},
    }


class RatingsTable:
    """Ratings parsed from CSV rows ``annotator,item,value[,occurrence]``."""

    def __init__(self, rows: list[tuple[str, str, object, int]]):
        self.rows = rows

    @classmethod
    def from_csv(cls, path: Path) -> "RatingsTable":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"empty ratings file: {path}")
            for raw in reader:
                if not raw:
                    continue
                annotator, item, value = raw[0], raw[1], _parse_value(raw[2])
                occurrence = int(raw[3]) if len(raw) > 3 and raw[3] != "" else 1
                rows.append((annotator, item, value, occurrence))
        return cls(rows)

    def first_ratings(self) -> dict:
        out: dict[str, dict] = {}
        for annotator, item, value, occurrence in self.rows:
            if occurrence == 1:
                out.setdefault(annotator, {})[item] = value
        return out

    def duplicate_pairs(self) -> dict:
        firsts = self.first_ratings()
        out: dict[str, list] = {}
        for annotator, item, value, occurrence in self.rows:
            if occurrence == 2 and item in firsts.get(annotator, {}):
                out.setdefault(annotator, []).append((firsts[annotator][item], value))
        return out

    def matrix(self) -> tuple[list[str], list[str], list[list]]:
        """(annotators, items, annotators x items grid) from first ratings."""
        firsts = self.first_ratings()
        annotators = sorted(firsts)
        items = sorted({item for ratings in firsts.values() for item in ratings})
        grid = [[firsts[a].get(item) for item in items] for a in annotators]
        return annotators, items, grid


def _parse_value(text: str):
    try:
        f = float(text)
    except ValueError:
        return text
    return int(f) if f.is_integer() else f
