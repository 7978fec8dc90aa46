"""N-gram counting over normalized sentences."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from ..errors import EmptyCorpus

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

MAX_ORDER = 5


@dataclass
class NGramCounts:
    """Raw n-gram occurrence counts for n = 1..order.

    Sentences are wrapped as `<s> w1 ... wk </s>` and every window of
    the padded sequence is counted. `vocab` lists <unk>, <s>, </s>
    first, then corpus words in first-appearance order (this fixes the
    word-id assignment downstream).
    """

    order: int
    ngrams: dict[int, dict[tuple[str, ...], int]]
    vocab: list[str]
    sentence_count: int
    warnings: list[str] = field(default_factory=list)


def count_ngrams(
    corpus: list[str],
    order: int,
    unk_threshold: int = 1,
    prune: int = 0,
) -> NGramCounts:
    """Count all n-grams of the padded sentences.

    Words seen fewer than `unk_threshold` times are replaced by <unk>
    (the default 1 keeps everything). `prune > 0` drops n-grams of
    order >= 2 whose count is <= prune, for large corpora.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}, got {order}")
    if not corpus:
        raise EmptyCorpus("cannot count n-grams of an empty corpus")

    word_freq: Counter[str] = Counter()
    sentences = []
    for text in corpus:
        words = text.split()
        sentences.append(words)
        word_freq.update(words)

    rare = {w for w, c in word_freq.items() if c < unk_threshold}

    vocab = [UNK, BOS, EOS]
    seen = set(vocab)
    ngrams: dict[int, dict[tuple[str, ...], int]] = {
        n: defaultdict(int) for n in range(1, order + 1)
    }
    for words in sentences:
        padded = [BOS] + [UNK if w in rare else w for w in words] + [EOS]
        for w in padded:
            if w not in seen:
                seen.add(w)
                vocab.append(w)
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                ngrams[n][tuple(padded[i : i + n])] += 1

    warnings = []
    if prune > 0:
        for n in range(2, order + 1):
            before = len(ngrams[n])
            ngrams[n] = {g: c for g, c in ngrams[n].items() if c > prune}
            dropped = before - len(ngrams[n])
            if dropped:
                warnings.append(f"pruned {dropped} {n}-grams with count <= {prune}")

    return NGramCounts(
        order=order,
        ngrams={n: dict(d) for n, d in ngrams.items()},
        vocab=vocab,
        sentence_count=len(sentences),
        warnings=warnings,
    )
