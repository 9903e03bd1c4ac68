"""Corpus ingestion: synchronized audio + raw ultrasound utterances with
phone-level alignments mapped onto the nine articulation classes.

Directory layout::

    <root>/<speaker>/<utt_id>.wav    RIFF WAV, PCM16
    <root>/<speaker>/<utt_id>.ult    raw uint8 frames, frame-major,
                                     scanline-major, echo-minor
    <root>/<speaker>/<utt_id>.meta   key=value lines: scanlines, echoes,
                                     fps, first_frame_time, session
    <root>/alignments.tsv            utt_id speaker phone start end word word_position
    <root>/classmap.tsv              phone_label  class_or_DISCARD
"""

from __future__ import annotations

import logging
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .classes import CLASSES, DISCARD, require_class
from .errors import ClassMapError, IngestionError, MetadataError, SplitError

log = logging.getLogger(__name__)

TARGET_RATE = 16000
# rates the polyphase resampler is allowed to ingest
ACCEPTED_RATES = frozenset({16000, 22050, 32000, 44100, 48000, 64000, 96000})

WORD_POSITIONS = ("initial", "medial", "final")


@dataclass(frozen=True)
class AudioStream:
    """PCM16 samples at 16 kHz (downsampling happens at load)."""

    samples: np.ndarray
    sample_rate: int = TARGET_RATE

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class UltrasoundStream:
    """Raw ultrasound frames, shape (count, scanlines, echoes), uint8.

    ``first_frame_time`` is the time of frame 0 on the audio clock; a
    positive value means the probe started recording after the audio.
    """

    frames: np.ndarray
    fps: float
    first_frame_time: float = 0.0

    def __post_init__(self):
        if self.fps <= 0:
            raise MetadataError(f"fps must be positive, got {self.fps}")
        if self.frames.ndim != 3 or 0 in self.frames.shape:
            raise MetadataError(f"ultrasound frames must be (count, scanlines, echoes), got {self.frames.shape}")

    @property
    def scanlines(self) -> int:
        return self.frames.shape[1]

    @property
    def echoes(self) -> int:
        return self.frames.shape[2]

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    def span(self) -> tuple[float, float]:
        """Time interval covered on the audio clock."""
        return self.first_frame_time, self.first_frame_time + self.num_frames / self.fps

    def frame_time(self, index: int) -> float:
        return self.first_frame_time + index / self.fps


@dataclass(frozen=True)
class Utterance:
    id: str
    speaker_id: str
    session_label: str
    audio: AudioStream
    ultrasound: UltrasoundStream


@dataclass(frozen=True)
class PhoneInstance:
    """A labeled time interval mapped to an articulation class.

    ``index`` is the 0-based position of the source row among the
    utterance's alignment rows (counting discarded rows too), which is the
    key used by synthetic ground-truth manifests.
    """

    utterance_id: str
    speaker_id: str
    phone_label: str
    cls: str
    start: float
    end: float
    word: str
    word_position: str
    index: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)


class ClassMap:
    """Total mapping from phone labels to articulation classes (or DISCARD)."""

    def __init__(self, entries: dict[str, str]):
        for label, cls in entries.items():
            if cls != DISCARD:
                require_class(cls)
        self.entries = dict(entries)

    def lookup(self, phone_label: str) -> str:
        try:
            return self.entries[phone_label]
        except KeyError:
            raise ClassMapError(f"phone label {phone_label!r} has no class-map entry") from None

    @classmethod
    def from_tsv(cls, path: Path) -> "ClassMap":
        entries = {}
        for line_no, line in enumerate(_read_lines(path), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise IngestionError(f"{path}:{line_no}: expected 'phone<TAB>class', got {line!r}")
            entries[parts[0]] = parts[1]
        return cls(entries)

    def to_tsv(self, path: Path) -> None:
        lines = [f"{label}\t{cls}" for label, cls in sorted(self.entries.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class Corpus:
    utterances: dict[str, Utterance]
    instances: list[PhoneInstance]
    dropped_instances: int = 0
    root: Path | None = None

    def speakers(self) -> list[str]:
        return sorted({u.speaker_id for u in self.utterances.values()})

    def class_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CLASSES}
        for inst in self.instances:
            counts[inst.cls] += 1
        return counts

    def instances_for(self, utterance_id: str) -> list[PhoneInstance]:
        return [i for i in self.instances if i.utterance_id == utterance_id]


# ---------------------------------------------------------------- file I/O

def _read_lines(path: Path) -> list[str]:
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"missing file: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def read_wav(path: Path) -> AudioStream:
    """Read a mono PCM16 WAV and downsample to 16 kHz if needed."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"missing file: {path}")
    try:
        with wave.open(str(path), "rb") as wav:
            if wav.getsampwidth() != 2:
                raise IngestionError(f"{path}: expected 16-bit PCM, got {8 * wav.getsampwidth()}-bit")
            if wav.getnchannels() != 1:
                raise IngestionError(f"{path}: expected mono audio, got {wav.getnchannels()} channels")
            rate = wav.getframerate()
            raw = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise IngestionError(f"corrupt WAV file {path}: {exc}") from exc
    samples = np.frombuffer(raw, dtype="<i2")
    if rate != TARGET_RATE:
        if rate not in ACCEPTED_RATES:
            raise IngestionError(f"{path}: unsupported sample rate {rate} Hz")
        g = np.gcd(TARGET_RATE, rate)
        resampled = resample_poly(samples.astype(np.float64), TARGET_RATE // g, rate // g)
        samples = np.clip(np.round(resampled), -32768, 32767).astype(np.int16)
    return AudioStream(samples=samples, sample_rate=TARGET_RATE)


def write_wav(path: Path, samples: np.ndarray, rate: int = TARGET_RATE) -> None:
    samples = np.asarray(samples, dtype="<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(samples.tobytes())


def read_meta(path: Path) -> dict[str, str]:
    meta = {}
    for line in _read_lines(path):
        if not line.strip():
            continue
        if "=" not in line:
            raise IngestionError(f"{path}: bad metadata line {line!r}")
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()
    return meta


def write_meta(path: Path, scanlines: int, echoes: int, fps: float,
               first_frame_time: float, session: str) -> None:
    text = (f"scanlines={scanlines}\nechoes={echoes}\nfps={fps!r}\n"
            f"first_frame_time={first_frame_time!r}\nsession={session}\n")
    Path(path).write_text(text, encoding="utf-8")


def read_ultrasound(ult_path: Path, meta_path: Path) -> tuple[UltrasoundStream, str]:
    """Read raw frames + sidecar metadata; returns (stream, session label)."""
    meta = read_meta(meta_path)
    try:
        scanlines = int(meta["scanlines"])
        echoes = int(meta["echoes"])
        fps = float(meta["fps"])
        first_frame_time = float(meta.get("first_frame_time", "0"))
    except (KeyError, ValueError) as exc:
        raise MetadataError(f"{meta_path}: {exc}") from exc
    if fps <= 0:
        raise MetadataError(f"{meta_path}: fps must be positive, got {fps}")
    if scanlines <= 0 or echoes <= 0:
        raise MetadataError(f"{meta_path}: non-positive frame geometry {scanlines}x{echoes}")

    ult_path = Path(ult_path)
    if not ult_path.exists():
        raise IngestionError(f"missing file: {ult_path}")
    raw = ult_path.read_bytes()
    frame_bytes = scanlines * echoes
    if len(raw) == 0 or len(raw) % frame_bytes != 0:
        raise IngestionError(f"corrupt ultrasound file {ult_path}: {len(raw)} bytes is not a multiple of {frame_bytes}")
    frames = np.frombuffer(raw, dtype=np.uint8).reshape(-1, scanlines, echoes)
    stream = UltrasoundStream(frames=frames, fps=fps, first_frame_time=first_frame_time)
    return stream, meta.get("session", "")


def write_ultrasound(ult_path: Path, frames: np.ndarray) -> None:
    np.ascontiguousarray(frames, dtype=np.uint8).tofile(str(ult_path))


def write_utterance_files(root: Path, speaker: str, utt_id: str, samples: np.ndarray,
                          frames: np.ndarray, fps: float, first_frame_time: float = 0.0,
                          session: str = "td", sample_rate: int = TARGET_RATE) -> None:
    """Emit the .wav/.ult/.meta triple for one utterance."""
    spk_dir = Path(root) / speaker
    spk_dir.mkdir(parents=True, exist_ok=True)
    write_wav(spk_dir / f"{utt_id}.wav", samples, sample_rate)
    write_ultrasound(spk_dir / f"{utt_id}.ult", frames)
    write_meta(spk_dir / f"{utt_id}.meta", frames.shape[1], frames.shape[2], fps,
               first_frame_time, session)


@dataclass
class AlignmentRow:
    utt_id: str
    speaker: str
    phone: str
    start: float
    end: float
    word: str
    word_position: str


def read_alignments(path: Path) -> list[AlignmentRow]:
    rows = []
    for line_no, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 7:
            raise IngestionError(f"{path}:{line_no}: expected 7 tab-separated fields, got {len(parts)}")
        try:
            start, end = float(parts[3]), float(parts[4])
        except ValueError as exc:
            raise IngestionError(f"{path}:{line_no}: bad time field: {exc}") from exc
        if parts[6] not in WORD_POSITIONS:
            raise IngestionError(f"{path}:{line_no}: bad word position {parts[6]!r}")
        rows.append(AlignmentRow(parts[0], parts[1], parts[2], start, end, parts[5], parts[6]))
    return rows


def write_alignments(path: Path, rows: list[AlignmentRow]) -> None:
    lines = [f"{r.utt_id}\t{r.speaker}\t{r.phone}\t{r.start!r}\t{r.end!r}\t{r.word}\t{r.word_position}"
             for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- loading

def load_corpus(root: Path, class_map: ClassMap | None = None) -> Corpus:
    """Load every utterance under ``root`` plus its classed phone instances.

    Phone instances whose interval is not covered by both parallel streams
    are dropped (counted on the returned corpus); labels mapping to DISCARD
    are skipped silently; unmapped labels raise ClassMapError.
    """
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"corpus root is not a directory: {root}")
    if class_map is None:
        class_map = ClassMap.from_tsv(root / "classmap.tsv")

    utterances: dict[str, Utterance] = {}
    for spk_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        speaker = spk_dir.name
        for wav_path in sorted(spk_dir.glob("*.wav")):
            utt_id = wav_path.stem
            if utt_id in utterances:
                raise IngestionError(f"duplicate utterance id {utt_id!r} (speaker {speaker})")
            audio = read_wav(wav_path)
            ultra, session = read_ultrasound(wav_path.with_suffix(".ult"), wav_path.with_suffix(".meta"))
            if audio.duration <= 0:
                raise IngestionError(f"{wav_path}: empty audio stream")
            utterances[utt_id] = Utterance(id=utt_id, speaker_id=speaker, session_label=session,
                                           audio=audio, ultrasound=ultra)

    instances: list[PhoneInstance] = []
    dropped = 0
    row_index: dict[str, int] = {}
    for row in read_alignments(root / "alignments.tsv"):
        index = row_index.get(row.utt_id, 0)
        row_index[row.utt_id] = index + 1
        cls = class_map.lookup(row.phone)
        if cls == DISCARD:
            continue
        if row.utt_id not in utterances:
            raise IngestionError(f"alignments reference unknown utterance {row.utt_id!r}")
        utt = utterances[row.utt_id]
        if not (row.start < row.end):
            raise IngestionError(f"degenerate interval [{row.start}, {row.end}] for {row.utt_id} row {index}")
        if not _covered_by_both(utt, row.start, row.end):
            dropped += 1
            continue
        instances.append(PhoneInstance(
            utterance_id=row.utt_id, speaker_id=row.speaker, phone_label=row.phone,
            cls=cls, start=row.start, end=row.end, word=row.word,
            word_position=row.word_position, index=index))

    if dropped:
        log.info("dropped %d phone instance(s) lacking parallel audio+ultrasound coverage", dropped)
    return Corpus(utterances=utterances, instances=instances, dropped_instances=dropped, root=root)


def _covered_by_both(utt: Utterance, start: float, end: float) -> bool:
    tol = 1e-9
    if start < -tol or end > utt.audio.duration + tol:
        return False
    ult_start, ult_end = utt.ultrasound.span()
    return start >= ult_start - tol and end <= ult_end + tol


def split_corpus(corpus: Corpus, train_speakers, validation_speakers, test_speakers):
    """Partition a corpus by speaker into (train, validation, test)."""
    train, val, test = set(train_speakers), set(validation_speakers), set(test_speakers)
    for a, b, names in ((train, val, "train/validation"), (train, test, "train/test"),
                        (val, test, "validation/test")):
        overlap = a & b
        if overlap:
            raise SplitError(f"speaker sets {names} overlap: {sorted(overlap)}")

    def subset(speakers: set) -> Corpus:
        utts = {uid: u for uid, u in corpus.utterances.items() if u.speaker_id in speakers}
        insts = [i for i in corpus.instances if i.speaker_id in speakers]
        return Corpus(utterances=utts, instances=insts, root=corpus.root)

    return subset(train), subset(val), subset(test)
