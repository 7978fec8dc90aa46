import json
import os
import wave
from pathlib import Path

import numpy as np
import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")


def write_wav(path, seconds=1.0, rate=16000, channels=1, width=2, seed=0):
    rng = np.random.default_rng(seed)
    n = int(rate * seconds)
    samples = (rng.normal(0, 0.1, n * channels).clip(-1, 1) * 32767).astype("<i2")
    if width != 2:
        samples = (samples // 256).astype(np.int8)
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(channels)
        wav.setsampwidth(width)
        wav.setframerate(rate)
        wav.writeframes(samples.tobytes())
    return path


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """Randomly initialized CTC model with the standard conv geometry.

    Built locally so tests never touch the network; small enough that a
    forward pass over one second of audio takes milliseconds.
    """
    import torch
    from transformers import (
        Wav2Vec2Config,
        Wav2Vec2CTCTokenizer,
        Wav2Vec2FeatureExtractor,
        Wav2Vec2ForCTC,
        Wav2Vec2Processor,
    )

    model_dir = tmp_path_factory.mktemp("tiny_model")
    # <s>/</s> mirror real checkpoints: the CTC tokenizer adds them as
    # bos/eos if absent, and the logit head must cover every token id
    tokens = list("abcdefghijklmnopqrstuvwxyz") + ["|", "[UNK]", "[PAD]", "<s>", "</s>"]
    vocab = {t: i for i, t in enumerate(tokens)}
    (model_dir / "vocab.json").write_text(json.dumps(vocab))
    tokenizer = Wav2Vec2CTCTokenizer(
        str(model_dir / "vocab.json"),
        unk_token="[UNK]",
        pad_token="[PAD]",
        word_delimiter_token="|",
    )
    feature_extractor = Wav2Vec2FeatureExtractor(
        feature_size=1,
        sampling_rate=16000,
        padding_value=0.0,
        do_normalize=True,
        return_attention_mask=True,
    )
    Wav2Vec2Processor(
        feature_extractor=feature_extractor, tokenizer=tokenizer
    ).save_pretrained(model_dir)

    config = Wav2Vec2Config(
        vocab_size=len(tokens),
        conv_dim=(32,) * 7,
        conv_stride=(5, 2, 2, 2, 2, 2, 2),
        conv_kernel=(10, 3, 3, 3, 3, 2, 2),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=8,
        pad_token_id=vocab["[PAD]"],
    )
    torch.manual_seed(0)
    Wav2Vec2ForCTC(config).save_pretrained(model_dir)
    return model_dir


@pytest.fixture(scope="session")
def wav_manifest(tmp_path_factory):
    """Ten 1-second 16 kHz mono WAVs plus their JSONL manifest."""
    audio_dir = tmp_path_factory.mktemp("audio")
    manifest = audio_dir / "manifest.jsonl"
    with manifest.open("w") as fh:
        for i in range(10):
            path = write_wav(audio_dir / f"utt{i:02d}.wav", seed=i)
            fh.write(json.dumps({"id": f"utt{i:02d}", "audio_path": str(path)}) + "\n")
    return manifest
