"""Synthetic decoding benchmark: grammar text plus noisy one-hot posteriors.

Builds a small subject-verb-object corpus, then renders test sentences
as per-character posterior matrices (one char frame followed by one
blank frame) where some word-internal characters are corrupted: the
confusable letter gets the majority of the mass, so greedy decoding
produces a wrong (usually out-of-lexicon) word while beam search with
a language model can recover the intended one. This stands in for real
acoustic-model output wherever the toolkit needs end-to-end exercise.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

import numpy as np

from .ctc_decode import PosteriorMatrix
from .textnorm import Vocabulary, build_vocab, encode

SUBJECTS = ["saya", "kami", "mereka", "dia", "kamu"]
VERBS = ["makan", "minum", "membaca", "menulis", "membeli", "menjual"]
OBJECTS = ["nasi", "air", "buku", "surat", "roti", "kopi", "ikan", "sayur"]
PLACES = ["di pasar", "di rumah", "di sekolah", "di kantor", ""]


def grammar_sentences(count: int, seed: int) -> list[str]:
    """Deterministic sample of subject-verb-object(-place) sentences.

    The first sentences systematically cover every word so a corpus of
    any reasonable size has no out-of-lexicon surprises.
    """
    rng = Random(seed)
    coverage = []
    for i in range(max(len(SUBJECTS), len(VERBS), len(OBJECTS), len(PLACES))):
        s = SUBJECTS[i % len(SUBJECTS)]
        v = VERBS[i % len(VERBS)]
        o = OBJECTS[i % len(OBJECTS)]
        p = PLACES[i % len(PLACES)]
        coverage.append(" ".join(x for x in (s, v, o, p) if x))
    sentences = list(coverage)
    while len(sentences) < count:
        s, v, o, p = (rng.choice(SUBJECTS), rng.choice(VERBS), rng.choice(OBJECTS),
                      rng.choice(PLACES))
        sentences.append(" ".join(x for x in (s, v, o, p) if x))
    return sentences[:count]


def all_grammar_words() -> set[str]:
    words = set(SUBJECTS) | set(VERBS) | set(OBJECTS)
    for place in PLACES:
        words.update(place.split())
    return words


def make_posteriors(
    text: str,
    vocab: Vocabulary,
    rng: Random,
    corrupt_prob: float = 0.5,
    confusion_mass: float = 0.55,
) -> PosteriorMatrix:
    """Render text as a posterior matrix with word-internal corruption.

    Each character becomes a one-hot frame followed by a blank frame;
    with probability `corrupt_prob` per word, one character's frame
    splits its mass between the true letter (1 - confusion_mass) and a
    random different letter (confusion_mass).
    """
    letters = [
        (i, tok)
        for i, tok in enumerate(vocab.tokens)
        if len(tok) == 1 and tok != "|" and i != vocab.blank_id
    ]
    letter_ids = [i for i, _ in letters]
    ids = encode(text, vocab)

    corrupted: dict[int, int] = {}  # char position -> confusable id
    pos = 0
    for word in text.split(" "):
        if word and rng.random() < corrupt_prob:
            offset = rng.randrange(len(word))
            true_id = ids[pos + offset]
            choices = [i for i in letter_ids if i != true_id]
            corrupted[pos + offset] = rng.choice(choices)
        pos += len(word) + 1

    frames = np.zeros((2 * len(ids), len(vocab)))
    for t, token_id in enumerate(ids):
        row = frames[2 * t]
        if t in corrupted:
            row[token_id] = 1.0 - confusion_mass
            row[corrupted[t]] = confusion_mass
        else:
            row[token_id] = 1.0
        frames[2 * t + 1, vocab.blank_id] = 1.0
    return PosteriorMatrix.from_probs(frames)


@dataclass
class SyntheticBenchmark:
    train_corpus: list[str]
    vocab: Vocabulary
    test_ids: list[str]
    test_references: list[str]
    posteriors: list[tuple[str, PosteriorMatrix]]


def make_benchmark(
    n_train: int = 200,
    n_test: int = 40,
    seed: int = 53,
    corrupt_prob: float = 0.5,
    confusion_mass: float = 0.55,
) -> SyntheticBenchmark:
    train = grammar_sentences(n_train, seed)
    test = grammar_sentences(n_test, seed + 1)
    vocab = build_vocab(train)
    rng = Random(seed + 2)
    ids = [f"utt{k:04d}" for k in range(len(test))]
    posteriors = [
        (utt_id, make_posteriors(text, vocab, rng, corrupt_prob, confusion_mass))
        for utt_id, text in zip(ids, test)
    ]
    return SyntheticBenchmark(
        train_corpus=train,
        vocab=vocab,
        test_ids=ids,
        test_references=test,
        posteriors=posteriors,
    )
