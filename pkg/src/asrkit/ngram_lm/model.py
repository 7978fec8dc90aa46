"""Queryable backoff n-gram model with log10 scores."""

from __future__ import annotations

import numpy as np

from .counts import BOS, EOS, UNK

# Conventional stand-in for log10(0); <s> is never predicted and gets
# this as its unigram "probability".
SENTINEL_LOG10 = -99.0


def _f32(x: float) -> float:
    return float(np.float32(x))


class NGramModel:
    """Backoff model: per-order maps from word-id tuples to (lp, bow).

    All log10 values are quantized to float32 on construction so that
    text (ARPA) and binary round trips reproduce queries bit-for-bit;
    the binary format stores f32 payloads.
    """

    def __init__(
        self,
        order: int,
        words: list[str],
        tables: dict[int, dict[tuple[int, ...], tuple[float, float]]],
        warnings: tuple[str, ...] = (),
    ):
        self.order = order
        self.words = list(words)
        self.word_ids = {w: i for i, w in enumerate(self.words)}
        self.warnings = tuple(warnings)
        self._tables: dict[int, dict[tuple[int, ...], tuple[float, float]]] = {}
        for n in range(1, order + 1):
            table = tables.get(n, {})
            if not table:
                self._tables[n] = {}
                continue
            grams = list(table.keys())
            values = np.array(list(table.values()), dtype=np.float32).astype(np.float64)
            self._tables[n] = {
                g: (lp, bow) for g, (lp, bow) in zip(grams, values.tolist())
            }
        self._unk_id = self.word_ids.get(UNK, -1)
        self._bos_id = self.word_ids.get(BOS, -1)
        self._eos_id = self.word_ids.get(EOS, -1)

    def __len__(self) -> int:
        return sum(len(t) for t in self._tables.values())

    def entry_count(self, n: int) -> int:
        return len(self._tables[n])

    def ngrams(self, n: int):
        """Iterate (word tuple, log10 prob, log10 backoff) at order n."""
        for ids, (lp, bow) in self._tables[n].items():
            yield tuple(self.words[i] for i in ids), lp, bow

    def ngrams_ids(self, n: int):
        for ids, (lp, bow) in self._tables[n].items():
            yield ids, lp, bow

    def word_id(self, word: str) -> int:
        return self.word_ids.get(word, self._unk_id)

    def _score_ids(self, history: tuple[int, ...], word_id: int) -> float:
        if len(history) > self.order - 1:
            history = history[len(history) - (self.order - 1):]
        total = 0.0
        while True:
            entry = self._tables[len(history) + 1].get(history + (word_id,))
            if entry is not None:
                return total + entry[0]
            if not history:
                return total + SENTINEL_LOG10
            hist_entry = self._tables[len(history)].get(history)
            if hist_entry is not None:
                total += hist_entry[1]
            history = history[1:]

    def score_word(self, history: list[str], word: str) -> float:
        """log10 P(word | history) via standard backoff recursion.

        OOV words (in the history or as the prediction) map to <unk>;
        histories longer than order-1 are truncated from the left.
        """
        hist_ids = tuple(self.word_id(w) for w in history)
        return self._score_ids(hist_ids, self.word_id(word))

    def score_words(self, words: list[str]) -> float:
        """Sum of per-word scores with a <s>-initial context, no </s> term.

        This is the quantity shallow fusion accumulates as words
        complete during decoding.
        """
        total = 0.0
        history: tuple[int, ...] = (self._bos_id,)
        for w in words:
            wid = self.word_id(w)
            total += self._score_ids(history, wid)
            history = (history + (wid,))[-(self.order - 1):] if self.order > 1 else ()
        return total

    def score_sentence(self, words: list[str]) -> float:
        """log10 P(w1..wk </s> | <s>): every word scored, then </s>."""
        total = self.score_words(words)
        history: tuple[int, ...] = tuple(self.word_id(w) for w in [BOS] + list(words))
        if self.order > 1:
            history = history[-(self.order - 1):]
        else:
            history = ()
        return total + self._score_ids(history, self._eos_id)

    @property
    def unk_word(self) -> str:
        return UNK

    @property
    def eos_word(self) -> str:
        return EOS
