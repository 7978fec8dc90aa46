"""Export CTC posteriors from a pretrained wav2vec2-style model.

Reads a JSONL manifest of utterances (needs `id` and `audio_path` per
line), refuses anything that is not 16 kHz mono 16-bit PCM WAV, runs
the model, applies log-softmax over the token axis, and writes:

  <out>/<id>.ctcl     one posterior matrix per utterance (format below)
  <out>/vocab.txt     the model's tokens in id order, one per line, with
                      the pad/unknown/word-delimiter tokens renamed to
                      the decoder conventions [PAD]/[UNK]/|
  <out>/index.jsonl   {"id": ..., "file": ...} per utterance

CTCL layout (little-endian): magic "CTCL", u32 version (1), u32 frame
count T, u32 vocab size V, then T*V float32 natural-log probabilities,
row-major. Rows exponentiate-sum to 1 within float precision.

File writes are atomic (temp file, then rename).
"""

from __future__ import annotations

import argparse
import json
import os
import struct
import sys
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CTCL_MAGIC = b"CTCL"
CTCL_VERSION = 1
REQUIRED_SAMPLE_RATE = 16000

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
WORD_DELIMITER = "|"


class ModelLoadError(Exception):
    """The acoustic model or its processor could not be loaded."""


class SampleRateError(Exception):
    """An input WAV is not 16 kHz mono 16-bit PCM."""


@dataclass
class ExportManifest:
    model: str
    utterances: list[tuple[str, str]]  # (utterance id, audio path)
    out_dir: Path
    log_softmax: bool = True  # always applied; recorded for clarity


@dataclass
class ExportResult:
    vocab_path: Path
    index_path: Path
    entries: list[tuple[str, str]]  # (utterance id, ctcl filename)
    blank_id: int


def load_utterances(manifest_path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with Path(manifest_path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append((str(obj["id"]), str(obj["audio_path"])))
    return pairs


def read_wav_16k_mono(path: str | Path) -> np.ndarray:
    """Strictly validated WAV load; returns float32 samples in [-1, 1]."""
    try:
        with wave.open(str(path), "rb") as wav:
            rate = wav.getframerate()
            channels = wav.getnchannels()
            width = wav.getsampwidth()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise SampleRateError(f"{path}: not a readable PCM WAV ({exc})") from exc
    if rate != REQUIRED_SAMPLE_RATE:
        raise SampleRateError(
            f"{path}: sample rate {rate}, need {REQUIRED_SAMPLE_RATE}; resample first"
        )
    if channels != 1:
        raise SampleRateError(f"{path}: {channels} channels, need mono")
    if width != 2:
        raise SampleRateError(f"{path}: sample width {width} bytes, need 16-bit PCM")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float32) / 32768.0
    return samples


def write_ctcl(path: Path, log_probs: np.ndarray) -> None:
    frames, vocab = log_probs.shape
    header = CTCL_MAGIC + struct.pack("<III", CTCL_VERSION, frames, vocab)
    payload = np.ascontiguousarray(log_probs, dtype="<f4").tobytes()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + payload)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(text.encode("utf-8"))
    os.replace(tmp, path)


def _load_model(identifier: str):
    try:
        import torch
        from transformers import AutoModelForCTC, AutoProcessor
    except ImportError as exc:  # pragma: no cover - hard dependency
        raise ModelLoadError(f"torch/transformers unavailable: {exc}") from exc
    try:
        processor = AutoProcessor.from_pretrained(identifier)
        model = AutoModelForCTC.from_pretrained(identifier)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {identifier!r}: {exc}") from exc
    model.eval()
    return torch, processor, model


def _export_vocab(processor, model) -> tuple[list[str], int]:
    """Model tokens in id order, role tokens renamed to decoder names."""
    tokenizer = processor.tokenizer
    id_to_token = {i: t for t, i in tokenizer.get_vocab().items()}
    tokens = [id_to_token[i] for i in range(len(id_to_token))]
    renames = {
        tokenizer.pad_token: PAD_TOKEN,
        tokenizer.unk_token: UNK_TOKEN,
        getattr(tokenizer, "word_delimiter_token", None): WORD_DELIMITER,
    }
    tokens = [renames.get(t, t) for t in tokens]
    blank_id = model.config.pad_token_id
    if tokens[blank_id] != PAD_TOKEN:
        raise ModelLoadError(
            f"model blank id {blank_id} does not carry the pad token "
            f"(found {tokens[blank_id]!r})"
        )
    return tokens, blank_id


def greedy_transcribe(log_probs: np.ndarray, tokens: list[str], blank_id: int) -> str:
    """Argmax path, collapse repeats, drop blanks, delimiter to space.

    Same arithmetic as the decoder toolkit's greedy pass, run on the
    exact float32 values written to disk.
    """
    best = log_probs.argmax(axis=1)
    out = []
    prev = -1
    for idx in best:
        if idx != prev and idx != blank_id:
            tok = tokens[idx]
            if tok == WORD_DELIMITER:
                out.append(" ")
            elif len(tok) == 1:
                out.append(tok)
        prev = idx
    return "".join(out)


def export(manifest: ExportManifest) -> ExportResult:
    torch, processor, model = _load_model(manifest.model)
    out_dir = Path(manifest.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tokens, blank_id = _export_vocab(processor, model)
    vocab_path = out_dir / "vocab.txt"
    _atomic_write_text(vocab_path, "".join(t + "\n" for t in tokens))

    entries = []
    with torch.no_grad():
        for utt_id, audio_path in manifest.utterances:
            samples = read_wav_16k_mono(audio_path)
            inputs = processor(
                samples, sampling_rate=REQUIRED_SAMPLE_RATE, return_tensors="pt"
            )
            logits = model(inputs.input_values).logits[0]
            log_probs = torch.log_softmax(logits, dim=-1).to(torch.float32).numpy()
            if log_probs.shape[1] != len(tokens):
                raise ModelLoadError(
                    f"model emits {log_probs.shape[1]} classes "
                    f"but the tokenizer has {len(tokens)} tokens"
                )
            filename = f"{utt_id}.ctcl"
            write_ctcl(out_dir / filename, log_probs)
            entries.append((utt_id, filename))

    index_path = out_dir / "index.jsonl"
    _atomic_write_text(
        index_path,
        "".join(
            json.dumps({"file": f, "id": i}, sort_keys=True) + "\n" for i, f in entries
        ),
    )
    return ExportResult(
        vocab_path=vocab_path, index_path=index_path, entries=entries, blank_id=blank_id
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="logit-export",
        description="Export CTC log-posteriors from a pretrained acoustic model.",
    )
    parser.add_argument("--model", required=True, help="model directory or identifier")
    parser.add_argument("--manifest", required=True, help="JSONL with id and audio_path")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        utterances = load_utterances(args.manifest)
        result = export(ExportManifest(args.model, utterances, Path(args.out)))
    except (ModelLoadError, SampleRateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"exported {len(result.entries)} utterances to {args.out} "
        f"(vocab {result.vocab_path.name}, blank id {result.blank_id})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
