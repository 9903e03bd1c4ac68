"""Synthetic desk-scale corpora with class-conditional signal templates.

Each articulation class gets a distinct two-tone audio mixture and a
distinct bright-ridge depth in the ultrasound frames, so a classifier can
learn the class set from small corpora. A substitution-error rate renders
a fraction of labeled instances with another class's templates, recording
the truth in ``truth.tsv`` (rows: utt_id, phone_index, labeled_class,
rendered_class).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classes import CLASSES, CLASS_INDEX, DISCARD
from .corpus import (
    AlignmentRow,
    ClassMap,
    WORD_POSITIONS,
    write_alignments,
    write_utterance_files,
)
from .errors import SyntheticSpecError

# one representative phone label per class, plus discard labels the
# generator sprinkles in to exercise the class map
PHONE_FOR_CLASS = {
    "alveolar": "t",
    "dental": "th",
    "labial": "p",
    "labiovelar": "w",
    "lateral": "l",
    "palatal": "j",
    "postalveolar": "sh",
    "rhotic": "r",
    "velar": "k",
}
DISCARD_LABELS = ("sil", "aa")

SAMPLE_RATE = 16000


@dataclass(frozen=True)
class SyntheticSpec:
    speakers: int = 4
    utterances_per_speaker: int = 8
    phones_per_utterance: int = 9
    ultrasound_fps: float = 120.0
    scanlines: int = 63
    echoes: int = 96
    phone_duration: float = 0.22
    gap_duration: float = 0.06
    error_rate: float = 0.0
    error_map: dict = field(default_factory=dict)   # labeled class -> rendered class
    session_label: str = "td"
    speaker_prefix: str = "spk"
    noise_level: float = 1.0
    speaker_variability: float = 1.0
    first_frame_time: float = 0.0

    def validate(self) -> None:
        if self.ultrasound_fps <= 0:
            raise SyntheticSpecError(f"ultrasound fps must be positive, got {self.ultrasound_fps}")
        if not (0.0 <= self.error_rate <= 1.0):
            raise SyntheticSpecError(f"error rate must be in [0, 1], got {self.error_rate}")
        if self.speakers < 1 or self.utterances_per_speaker < 1 or self.phones_per_utterance < 1:
            raise SyntheticSpecError("speaker/utterance/phone counts must be >= 1")
        if self.phone_duration <= 0 or self.gap_duration < 0:
            raise SyntheticSpecError("phone duration must be > 0 and gap >= 0")
        if self.scanlines < 2 or self.echoes < 2:
            raise SyntheticSpecError("frame geometry must be at least 2x2")
        for labeled, rendered in self.error_map.items():
            if labeled not in CLASS_INDEX or rendered not in CLASS_INDEX:
                raise SyntheticSpecError(f"error map entry {labeled!r} -> {rendered!r} uses unknown classes")


def class_tones(cls: str) -> tuple[float, float]:
    """The two audio tone frequencies used for a class."""
    i = CLASS_INDEX[cls]
    return 250.0 + 180.0 * i, 950.0 + 320.0 * i


def class_ridge_depth(cls: str, echoes: int) -> float:
    """Echo-axis center of the bright ridge for a class."""
    return (CLASS_INDEX[cls] + 1) / (len(CLASSES) + 1) * echoes


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int, out_dir: Path) -> Path:
    """Emit a corpus directory plus ground-truth manifest; deterministic in seed."""
    spec.validate()
    rng = np.random.default_rng(seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    alignment_rows: list[AlignmentRow] = []
    truth_rows: list[tuple[str, int, str, str]] = []

    for spk_i in range(spec.speakers):
        speaker = f"{spec.speaker_prefix}{spk_i:02d}"
        # mild per-speaker variation so held-out speakers are non-trivial
        detune = 1.0 + rng.normal(0.0, 0.004 * spec.speaker_variability)
        ridge_shift = rng.normal(0.0, 0.008 * spec.echoes * spec.speaker_variability)

        for utt_i in range(spec.utterances_per_speaker):
            utt_id = f"{speaker}-u{utt_i:03d}"
            rows, truths, samples, frames = _render_utterance(
                spec, rng, utt_id, speaker, detune, ridge_shift)
            alignment_rows.extend(rows)
            truth_rows.extend(truths)
            write_utterance_files(out_dir, speaker, utt_id, samples, frames,
                                  fps=spec.ultrasound_fps,
                                  first_frame_time=spec.first_frame_time,
                                  session=spec.session_label)

    write_alignments(out_dir / "alignments.tsv", alignment_rows)
    entries = {label: cls for cls, label in PHONE_FOR_CLASS.items()}
    entries.update({label: DISCARD for label in DISCARD_LABELS})
    ClassMap(entries).to_tsv(out_dir / "classmap.tsv")

    truth_lines = [f"{u}\t{i}\t{lab}\t{ren}" for u, i, lab, ren in truth_rows]
    (out_dir / "truth.tsv").write_text("\n".join(truth_lines) + "\n", encoding="utf-8")
    return out_dir


def load_truth(path: Path) -> dict[tuple[str, int], tuple[str, str]]:
    """Read a truth manifest into {(utt_id, phone_index): (labeled, rendered)}."""
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        utt, idx, labeled, rendered = line.split("\t")
        out[(utt, int(idx))] = (labeled, rendered)
    return out


def _render_utterance(spec: SyntheticSpec, rng, utt_id: str, speaker: str,
                      detune: float, ridge_shift: float):
    gap, dur = spec.gap_duration, spec.phone_duration
    n = spec.phones_per_utterance
    total = gap + n * (dur + gap)

    # labeled classes cycle through a per-utterance shuffle of the class set
    shuffled = [CLASSES[i] for i in rng.permutation(len(CLASSES))]
    labeled = [shuffled[i % len(CLASSES)] for i in range(n)]

    rows: list[AlignmentRow] = []
    truths: list[tuple[str, int, str, str]] = []
    intervals = []  # (start, end, rendered_cls)
    rows.append(AlignmentRow(utt_id, speaker, DISCARD_LABELS[0], 0.0, gap, "sil", "initial"))
    for i, cls in enumerate(labeled):
        start = gap + i * (dur + gap)
        end = start + dur
        rendered = cls
        if cls in spec.error_map and rng.random() < spec.error_rate:
            rendered = spec.error_map[cls]
        word = f"w{i:02d}{PHONE_FOR_CLASS[cls]}"
        rows.append(AlignmentRow(utt_id, speaker, PHONE_FOR_CLASS[cls], start, end,
                                 word, WORD_POSITIONS[i % 3]))
        # phone_index counts every alignment row of the utterance, including sil
        truths.append((utt_id, len(rows) - 1, cls, rendered))
        intervals.append((start, end, rendered))

    samples = _render_audio(spec, rng, total, intervals, detune)
    frames = _render_ultrasound(spec, rng, total, intervals, ridge_shift)
    return rows, truths, samples, frames


def _render_audio(spec, rng, total: float, intervals, detune: float) -> np.ndarray:
    n_samples = int(round(total * SAMPLE_RATE))
    t = np.arange(n_samples) / SAMPLE_RATE
    wave = rng.normal(0.0, 40.0 * spec.noise_level, size=n_samples)
    for start, end, cls in intervals:
        f1, f2 = class_tones(cls)
        seg = slice(int(round(start * SAMPLE_RATE)), int(round(end * SAMPLE_RATE)))
        ts = t[seg]
        envelope = np.hanning(ts.size)
        tone = np.sin(2 * np.pi * f1 * detune * ts) + 0.6 * np.sin(2 * np.pi * f2 * detune * ts)
        wave[seg] += 8000.0 * envelope * tone
    return np.clip(np.round(wave), -32768, 32767).astype(np.int16)


def _render_ultrasound(spec, rng, total: float, intervals, ridge_shift: float) -> np.ndarray:
    n_frames = int(total * spec.ultrasound_fps) + 1
    times = spec.first_frame_time + np.arange(n_frames) / spec.ultrasound_fps
    depth = np.arange(spec.echoes, dtype=np.float64)
    sigma = 0.035 * spec.echoes

    frames = rng.integers(0, max(2, int(30 * spec.noise_level)),
                          size=(n_frames, spec.scanlines, spec.echoes)).astype(np.float64)
    for start, end, cls in intervals:
        center = class_ridge_depth(cls, spec.echoes) + ridge_shift
        mask = (times >= start) & (times < end)
        if not mask.any():
            continue
        wobble = rng.normal(0.0, 0.2, size=int(mask.sum()))
        profile = 190.0 * np.exp(-0.5 * ((depth[None, :] - (center + wobble)[:, None]) / sigma) ** 2)
        frames[mask] += profile[:, None, :]
    return np.clip(frames, 0, 255).astype(np.uint8)
