"""Corpus -> sample-set assembly, balancing, and serialization."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..container import read_container, write_container
from ..errors import CheckpointError
from ..classes import CLASSES
from .cache import MfccCache
from .mfcc import MfccConfig
from .samples import BalancePolicy, Sample, balance_training_set, build_sample


def build_corpus_samples(corpus, mfcc_config: MfccConfig | None = None,
                         cache_dir: Path | None = None) -> list[Sample]:
    """One unperturbed sample per phone instance, utterances in sorted order."""
    cfg = mfcc_config or MfccConfig()
    cache = MfccCache(cache_dir, cfg)
    frames_by_utt = {}
    samples = []
    for utt_id in sorted(corpus.utterances):
        frames_by_utt[utt_id] = cache.get_or_compute(corpus.utterances[utt_id])
    for inst in corpus.instances:
        utt = corpus.utterances[inst.utterance_id]
        samples.append(build_sample(inst, utt, frames_by_utt[inst.utterance_id]))
    return samples


def build_balanced_samples(corpus, policy: BalancePolicy, seed: int,
                           mfcc_config: MfccConfig | None = None,
                           cache_dir: Path | None = None) -> list[Sample]:
    """Balanced training set: originals plus perturbed rebuilds up to the cap."""
    cfg = mfcc_config or MfccConfig()
    cache = MfccCache(cache_dir, cfg)
    frames_by_utt = {uid: cache.get_or_compute(corpus.utterances[uid])
                     for uid in sorted(corpus.utterances)}
    instance_by_key = {(i.utterance_id, i.index): i for i in corpus.instances}

    def rebuild(sample: Sample, perturbation_ms: float) -> Sample:
        inst = instance_by_key[(sample.utterance_id, sample.phone_index)]
        utt = corpus.utterances[inst.utterance_id]
        return build_sample(inst, utt, frames_by_utt[inst.utterance_id], perturbation_ms)

    originals = [build_sample(inst, corpus.utterances[inst.utterance_id],
                              frames_by_utt[inst.utterance_id])
                 for inst in corpus.instances]
    return balance_training_set(originals, policy, seed, rebuild)


def save_samples(path: Path, samples: list[Sample]) -> None:
    from .samples import AUDIO_STACK_SHAPE, ULTRA_STACK_SHAPE
    if not samples:
        audio = np.zeros((0,) + AUDIO_STACK_SHAPE, dtype="<f4")
        ultra = np.zeros((0,) + ULTRA_STACK_SHAPE, dtype="<f4")
    else:
        audio = np.stack([s.audio_stack for s in samples]).astype("<f4")
        ultra = np.stack([s.ultrasound_stack for s in samples]).astype("<f4")
    labels = np.asarray([CLASSES.index(s.label) for s in samples], dtype="<i8")
    anchors = np.asarray([s.anchor_time for s in samples], dtype="<f8")
    perturbations = np.asarray([s.perturbation_ms for s in samples], dtype="<f8")
    phone_indices = np.asarray([s.phone_index for s in samples], dtype="<i8")
    meta = {
        "count": len(samples),
        "utterance_ids": [s.utterance_id for s in samples],
        "speakers": [s.speaker_id for s in samples],
    }
    write_container(path, "samples", meta, {
        "audio": audio, "ultrasound": ultra, "labels": labels,
        "anchor_times": anchors, "perturbations_ms": perturbations,
        "phone_indices": phone_indices,
    })


def load_samples(path: Path) -> list[Sample]:
    kind, meta, tensors = read_container(path)
    if kind != "samples":
        raise CheckpointError(f"{path} holds a {kind!r} container, not samples")
    out = []
    for i in range(meta["count"]):
        out.append(Sample(
            audio_stack=tensors["audio"][i],
            ultrasound_stack=tensors["ultrasound"][i],
            label=CLASSES[int(tensors["labels"][i])],
            utterance_id=meta["utterance_ids"][i],
            anchor_time=float(tensors["anchor_times"][i]),
            perturbation_ms=float(tensors["perturbations_ms"][i]),
            speaker_id=meta["speakers"][i],
            phone_index=int(tensors["phone_indices"][i]),
        ))
    return out
