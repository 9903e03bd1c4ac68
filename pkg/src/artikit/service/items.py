"""Annotation item manifests built from a loaded corpus."""

from __future__ import annotations

from ..classes import require_class


def item_id_for(utterance_id: str, phone_index: int) -> str:
    return f"{utterance_id}:{phone_index}"


def parse_item_id(item_id: str) -> tuple[str, int]:
    utt, _, idx = item_id.rpartition(":")
    return utt, int(idx)


def build_item_manifest(corpus, target_class: str, substitution_class: str,
                        max_items: int | None = None) -> list[dict]:
    """One item per phone instance of the target class.

    The word interval is the union of instances sharing the utterance and
    word string (synthetic corpora carry one phone per word, so this is
    exact there).
    """
    require_class(target_class)
    require_class(substitution_class)
    spans: dict[tuple[str, str], tuple[float, float]] = {}
    for inst in corpus.instances:
        key = (inst.utterance_id, inst.word)
        lo, hi = spans.get(key, (inst.start, inst.end))
        spans[key] = (min(lo, inst.start), max(hi, inst.end))

    items = []
    for inst in corpus.instances:
        if inst.cls != target_class:
            continue
        word_start, word_end = spans[(inst.utterance_id, inst.word)]
        items.append({
            "item_id": item_id_for(inst.utterance_id, inst.index),
            "utterance_id": inst.utterance_id,
            "phone_index": inst.index,
            "speaker": inst.speaker_id,
            "word": inst.word,
            "phone_label": inst.phone_label,
            "phone_start": inst.start,
            "phone_end": inst.end,
            "word_start": word_start,
            "word_end": word_end,
            "target_prompt": f"Please rate the {target_class} /{inst.phone_label}/ "
                             f"in '{inst.word}'",
            "substitution_prompt": f"Please rate the target phone for "
                                   f"{substitution_class} substitution",
        })
        if max_items is not None and len(items) >= max_items:
            break
    return items
