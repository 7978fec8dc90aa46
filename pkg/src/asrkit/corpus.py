"""Dataset manifests, audio metadata validation, and the recombine/split recipe.

Manifests are JSON Lines: one object per utterance with keys
id, audio_path, transcript, duration_s, sample_rate_hz, speaker_id,
source, subset. Audio is expected to be 16-bit PCM mono WAV at 16 kHz
after preprocessing; validation only reports problems, conversion is an
external tool's job.
"""

from __future__ import annotations

import json
import random
import wave
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import floor
from pathlib import Path

from .errors import EmptyInput, MissingField, ParseError

SOURCES = ("titml_idn", "magic_data", "common_voice", "other")
SUBSETS = ("train", "validation", "test")

TARGET_SAMPLE_RATE_HZ = 16000

# Published per-source durations (seconds): 14h31m / 3h33m / 6h14m01s.
EXPECTED_SOURCE_DURATION_S = {
    "titml_idn": 14 * 3600 + 31 * 60,
    "magic_data": 3 * 3600 + 33 * 60,
    "common_voice": 6 * 3600 + 14 * 60 + 1,
}

_REQUIRED_FIELDS = (
    "id",
    "audio_path",
    "transcript",
    "duration_s",
    "sample_rate_hz",
    "speaker_id",
    "source",
    "subset",
)


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    audio_path: str
    transcript_raw: str
    duration_s: float
    sample_rate_hz: int
    speaker_id: str
    source: str
    subset: str
    transcript_norm: str | None = None

    def with_normalized(self, text: str) -> "UtteranceRecord":
        return replace(self, transcript_norm=text)


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic recombination split: validation gets floor((1-f)*N)."""

    train_fraction: float = 0.9
    seed: int = 53

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")

    def validation_count(self, n: int) -> int:
        # Exact rational arithmetic so float noise cannot move the floor
        # (e.g. (1-0.9)*10 evaluates to 0.9999999999999998 in binary).
        frac = Fraction(self.train_fraction).limit_denominator(1_000_000)
        return floor((1 - frac) * n)


def record_to_json(rec: UtteranceRecord) -> str:
    obj = {
        "id": rec.id,
        "audio_path": rec.audio_path,
        "transcript": rec.transcript_raw,
        "duration_s": rec.duration_s,
        "sample_rate_hz": rec.sample_rate_hz,
        "speaker_id": rec.speaker_id,
        "source": rec.source,
        "subset": rec.subset,
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def load_manifest(path: str | Path) -> list[UtteranceRecord]:
    """Parse a JSONL manifest, preserving line order.

    Raises ParseError (with the 1-based line number) for malformed JSON
    or bad field types, MissingField for absent keys.
    """
    path = Path(path)
    records: list[UtteranceRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from exc
            if not isinstance(obj, dict):
                raise ParseError("manifest line is not a JSON object", path=str(path), line=lineno)
            for key in _REQUIRED_FIELDS:
                if key not in obj:
                    raise MissingField(key, path=str(path), line=lineno)
            try:
                duration = float(obj["duration_s"])
                rate = int(obj["sample_rate_hz"])
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad numeric field: {exc}", path=str(path), line=lineno) from exc
            source = str(obj["source"])
            if source not in SOURCES:
                raise ParseError(f"unknown source {source!r}", path=str(path), line=lineno)
            subset = str(obj["subset"])
            if subset not in SUBSETS:
                raise ParseError(f"unknown subset {subset!r}", path=str(path), line=lineno)
            records.append(
                UtteranceRecord(
                    id=str(obj["id"]),
                    audio_path=str(obj["audio_path"]),
                    transcript_raw=str(obj["transcript"]),
                    duration_s=duration,
                    sample_rate_hz=rate,
                    speaker_id=str(obj["speaker_id"]),
                    source=source,
                    subset=subset,
                )
            )
    return records


def save_manifest(records: list[UtteranceRecord], path: str | Path) -> None:
    data = "".join(record_to_json(r) + "\n" for r in records)
    Path(path).write_bytes(data.encode("utf-8"))


@dataclass
class AudioIssue:
    record_id: str
    path: str
    message: str


@dataclass
class ValidationReport:
    checked: int = 0
    flagged: list[AudioIssue] = field(default_factory=list)
    io_errors: list[AudioIssue] = field(default_factory=list)
    duration_by_source: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.flagged and not self.io_errors

    def duration_warnings(self) -> list[str]:
        """Human-readable mismatches against the published per-source totals."""
        notes = []
        for source, expected in EXPECTED_SOURCE_DURATION_S.items():
            actual = self.duration_by_source.get(source)
            if actual is not None and abs(actual - expected) > 1.0:
                notes.append(
                    f"{source}: manifest total {_hms(actual)} differs from "
                    f"published {_hms(expected)}"
                )
        return notes


def _hms(seconds: float) -> str:
    s = int(round(seconds))
    return f"{s // 3600}h{(s % 3600) // 60:02d}m{s % 60:02d}s"


def validate_audio(records: list[UtteranceRecord]) -> ValidationReport:
    """Flag records that are not 16 kHz mono 16-bit PCM; collect IO errors.

    Checks the manifest metadata first, then the WAV header when the
    file is readable. Never raises for individual files.
    """
    report = ValidationReport()
    for rec in records:
        report.checked += 1
        report.duration_by_source[rec.source] = (
            report.duration_by_source.get(rec.source, 0.0) + rec.duration_s
        )
        if rec.duration_s <= 0:
            report.flagged.append(AudioIssue(rec.id, rec.audio_path, "non-positive duration"))
        if rec.sample_rate_hz != TARGET_SAMPLE_RATE_HZ:
            report.flagged.append(
                AudioIssue(
                    rec.id,
                    rec.audio_path,
                    f"needs resample to {TARGET_SAMPLE_RATE_HZ} "
                    f"(manifest says {rec.sample_rate_hz})",
                )
            )
        try:
            with wave.open(rec.audio_path, "rb") as wav:
                rate = wav.getframerate()
                channels = wav.getnchannels()
                width = wav.getsampwidth()
        except FileNotFoundError:
            report.io_errors.append(AudioIssue(rec.id, rec.audio_path, "file not found"))
            continue
        except (wave.Error, EOFError, OSError) as exc:
            report.io_errors.append(AudioIssue(rec.id, rec.audio_path, f"unreadable WAV: {exc}"))
            continue
        if rate != TARGET_SAMPLE_RATE_HZ:
            report.flagged.append(
                AudioIssue(
                    rec.id,
                    rec.audio_path,
                    f"needs resample to {TARGET_SAMPLE_RATE_HZ} (file is {rate})",
                )
            )
        if channels != 1:
            report.flagged.append(
                AudioIssue(rec.id, rec.audio_path, f"expected mono, file has {channels} channels")
            )
        if width != 2:
            report.flagged.append(
                AudioIssue(rec.id, rec.audio_path, f"expected 16-bit PCM, sample width {width}")
            )
    return report


def recombine_and_split(
    train: list[UtteranceRecord],
    validation: list[UtteranceRecord],
    spec: SplitSpec,
) -> tuple[list[UtteranceRecord], list[UtteranceRecord]]:
    """Pool two subsets, shuffle deterministically, and re-split.

    Records are sorted by (id, audio_path, speaker_id) before the
    seeded shuffle so the outcome is independent of input order. The
    result is an exact partition: validation gets floor((1-f)*N)
    records, train gets the rest, and every input record appears in
    exactly one output.
    """
    union = list(train) + list(validation)
    if not union:
        raise EmptyInput("cannot split an empty record set")
    union.sort(key=lambda r: (r.id, r.audio_path, r.speaker_id))
    random.Random(spec.seed).shuffle(union)
    n_val = spec.validation_count(len(union))
    n_train = len(union) - n_val
    new_train = [replace(r, subset="train") for r in union[:n_train]]
    new_val = [replace(r, subset="validation") for r in union[n_train:]]
    return new_train, new_val
