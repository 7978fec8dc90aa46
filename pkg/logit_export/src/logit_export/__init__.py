"""Acoustic-model adapter: pretrained CTC model -> CTCL posterior files."""

from .exporter import (
    ExportManifest,
    ExportResult,
    ModelLoadError,
    SampleRateError,
    export,
    greedy_transcribe,
    load_utterances,
    read_wav_16k_mono,
)

__version__ = "0.1.0"

__all__ = [
    "ExportManifest",
    "ExportResult",
    "ModelLoadError",
    "SampleRateError",
    "export",
    "greedy_transcribe",
    "load_utterances",
    "read_wav_16k_mono",
]
