"""Session construction: seeded item shuffle plus duplicate injection.

Duplicates are re-insertions of already-listed items with occurrence 2,
20% of the manifest size rounded to nearest, each placed at a seeded
random position after its original, so intra-annotator agreement can be
measured without the annotator spotting a pattern.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

DUPLICATE_FRACTION = 0.2


def manifest_digest(items: list[dict]) -> str:
    blob = json.dumps(items, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def session_id_for(annotator_id: str, digest: str, seed: int) -> str:
    key = f"{annotator_id}|{digest}|{seed}".encode("utf-8")
    return hashlib.sha256(key).hexdigest()[:16]


def build_playlist(num_items: int, seed: int,
                   duplicate_fraction: float = DUPLICATE_FRACTION) -> list[tuple[int, int]]:
    """Ordered (item_index, occurrence) entries for a session."""
    rng = np.random.default_rng(seed)
    order = [int(i) for i in rng.permutation(num_items)]
    entries: list[tuple[int, int]] = [(i, 1) for i in order]
    n_dup = int(round(duplicate_fraction * num_items))
    chosen = sorted(int(i) for i in rng.choice(num_items, size=n_dup, replace=False))
    for item_index in chosen:
        pos = next(p for p, (idx, occ) in enumerate(entries) if idx == item_index and occ == 1)
        slot = int(rng.integers(pos + 1, len(entries) + 1))
        entries.insert(slot, (item_index, 2))
    return entries


def build_session_doc(annotator_id: str, items: list[dict], seed: int,
                      duplicate_fraction: float = DUPLICATE_FRACTION) -> dict:
    digest = manifest_digest(items)
    playlist = build_playlist(len(items), seed, duplicate_fraction)
    return {
        "session_id": session_id_for(annotator_id, digest, seed),
        "annotator_id": annotator_id,
        "seed": seed,
        "manifest_digest": digest,
        "items": items,
        "playlist": [[i, occ] for i, occ in playlist],
        "num_duplicates": len(playlist) - len(items),
    }
