"""CTC decoding: greedy and prefix beam search with optional shallow fusion.

The beam decoder keeps, per collapsed prefix, separate log-domain
masses for alignments ending in blank vs. non-blank (the standard
prefix recursion), so at small scale its per-string totals equal the
exhaustive sum over all alignments. With a language model, a word's
log10 probability (weighted by alpha, converted to natural log) plus a
word bonus beta is added every time a word delimiter or the utterance
end completes a word.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, NotNormalized, ShapeMismatch, TruncatedFile, VersionMismatch
from .ngram_lm import NGramModel
from .textnorm import Vocabulary

LOG10 = math.log(10.0)
NEG_INF = float("-inf")

CTCL_MAGIC = b"CTCL"
CTCL_VERSION = 1


class PosteriorMatrix:
    """T x V natural-log per-frame probabilities over the vocabulary."""

    def __init__(self, log_probs: np.ndarray):
        arr = np.asarray(log_probs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch(f"expected a T x V matrix, got shape {arr.shape}")
        row_sums = np.exp(arr).sum(axis=1)
        bad = np.abs(row_sums - 1.0) > 1e-4
        if bad.any():
            frame = int(np.argmax(bad))
            raise NotNormalized(
                f"frame {frame}: probabilities sum to {row_sums[frame]:.6f}, not 1"
            )
        self.log_probs = arr

    @property
    def frames(self) -> int:
        return self.log_probs.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.log_probs.shape[1]

    @classmethod
    def from_probs(cls, probs: np.ndarray) -> "PosteriorMatrix":
        with np.errstate(divide="ignore"):
            return cls(np.log(np.asarray(probs, dtype=np.float64)))

    def save(self, path: str | Path) -> None:
        header = CTCL_MAGIC + struct.pack("<III", CTCL_VERSION, self.frames, self.vocab_size)
        payload = self.log_probs.astype("<f4").tobytes()
        Path(path).write_bytes(header + payload)

    @classmethod
    def load(cls, path: str | Path) -> "PosteriorMatrix":
        data = Path(path).read_bytes()
        if len(data) < 4 or data[:4] != CTCL_MAGIC:
            raise BadMagic(f"{path}: not a CTCL file")
        if len(data) < 16:
            raise TruncatedFile(f"{path}: header incomplete")
        version, frames, vocab = struct.unpack("<III", data[4:16])
        if version != CTCL_VERSION:
            raise VersionMismatch(f"{path}: format version {version}, expected {CTCL_VERSION}")
        expected = 16 + 4 * frames * vocab
        if len(data) < expected:
            raise TruncatedFile(f"{path}: expected {expected} bytes, got {len(data)}")
        arr = np.frombuffer(data[16:expected], dtype="<f4").reshape(frames, vocab)
        return cls(arr.astype(np.float64))


@dataclass(frozen=True)
class DecodeConfig:
    beam_width: int = 100
    lm_weight: float = 0.5  # alpha
    word_bonus: float = 1.0  # beta
    prune_log_threshold: float = -9.21  # ~ln(1e-4)

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.lm_weight < 0:
            raise ValueError("lm_weight must be non-negative")


def _logaddexp(a: float, b: float) -> float:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def _check_shapes(post: PosteriorMatrix, vocab: Vocabulary) -> None:
    if post.vocab_size != len(vocab):
        raise ShapeMismatch(
            f"posterior width {post.vocab_size} != vocabulary size {len(vocab)}"
        )


def _ids_to_text(ids: tuple[int, ...], vocab: Vocabulary) -> str:
    return "".join(vocab.token_text(i) for i in ids)


def greedy_decode(post: PosteriorMatrix, vocab: Vocabulary) -> str:
    """Per-frame argmax, collapse repeats, drop blanks, "|" to space."""
    _check_shapes(post, vocab)
    best = post.log_probs.argmax(axis=1)
    out: list[int] = []
    prev = -1
    for idx in best:
        if idx != prev and idx != vocab.blank_id:
            out.append(int(idx))
        prev = idx
    return _ids_to_text(tuple(out), vocab)


class _Hypothesis:
    __slots__ = ("p_blank", "p_nonblank", "lm_log10", "n_words", "lm_history", "partial")

    def __init__(self, p_blank, p_nonblank, lm_log10, n_words, lm_history, partial):
        self.p_blank = p_blank
        self.p_nonblank = p_nonblank
        self.lm_log10 = lm_log10
        self.n_words = n_words
        self.lm_history = lm_history  # tuple of completed words
        self.partial = partial  # token ids of the word in progress

    @property
    def p_total(self) -> float:
        return _logaddexp(self.p_blank, self.p_nonblank)


def _advance_lm(
    hyp: _Hypothesis, lm: NGramModel, vocab: Vocabulary
) -> tuple[float, int, tuple[str, ...]]:
    """LM fields after completing the pending partial word, if any."""
    word = _ids_to_text(hyp.partial, vocab)
    if not word:
        return hyp.lm_log10, hyp.n_words, hyp.lm_history
    score = hyp.lm_log10 + lm.score_word(list(hyp.lm_history), word)
    history = hyp.lm_history + (word,)
    if lm.order > 1:
        history = history[-(lm.order - 1):]
    else:
        history = ()
    return score, hyp.n_words + 1, history


def beam_decode(
    post: PosteriorMatrix,
    vocab: Vocabulary,
    cfg: DecodeConfig | None = None,
    lm: NGramModel | None = None,
) -> list[tuple[str, float]]:
    """Prefix beam search; returns up to beam_width (text, score) ranked.

    score = ln P_ctc(prefix) + alpha * ln P_lm(words) + beta * n_words;
    without an LM the alpha/beta terms are zero. Equal scores order
    lexicographically by decoded text. The all-blank hypothesis is
    never evicted, so the result is never empty.
    """
    cfg = cfg or DecodeConfig()
    _check_shapes(post, vocab)
    blank = vocab.blank_id
    delimiter = vocab.delimiter_id

    initial_history = ("<s>",) if (lm is not None and lm.order > 1) else ()
    beam: dict[tuple[int, ...], _Hypothesis] = {
        (): _Hypothesis(0.0, NEG_INF, 0.0, 0, initial_history, ())
    }

    def running_score(hyp: _Hypothesis) -> float:
        if lm is None:
            return hyp.p_total
        return hyp.p_total + cfg.lm_weight * LOG10 * hyp.lm_log10 + cfg.word_bonus * hyp.n_words

    for row in post.log_probs:
        active = [int(c) for c in np.flatnonzero(row >= cfg.prune_log_threshold)]
        if not active:
            active = [int(row.argmax())]
        nxt: dict[tuple[int, ...], _Hypothesis] = {}

        def bump(prefix, fields_fn, blank_mass, nonblank_mass):
            hyp = nxt.get(prefix)
            if hyp is None:
                if prefix in beam:
                    src = beam[prefix]
                    fields = (src.lm_log10, src.n_words, src.lm_history, src.partial)
                else:
                    fields = fields_fn()
                hyp = _Hypothesis(NEG_INF, NEG_INF, *fields)
                nxt[prefix] = hyp
            if blank_mass != NEG_INF:
                hyp.p_blank = _logaddexp(hyp.p_blank, blank_mass)
            if nonblank_mass != NEG_INF:
                hyp.p_nonblank = _logaddexp(hyp.p_nonblank, nonblank_mass)

        for prefix, hyp in beam.items():
            total = hyp.p_total
            last = prefix[-1] if prefix else -1
            for c in active:
                logp = float(row[c])
                if c == blank:
                    bump(prefix, None, total + logp, NEG_INF)
                elif c == last:
                    # repeat extends the same run unless a blank intervened
                    bump(prefix, None, NEG_INF, hyp.p_nonblank + logp)
                    fields_fn = _extension_fields(hyp, c, delimiter, lm, vocab)
                    bump(prefix + (c,), fields_fn, NEG_INF, hyp.p_blank + logp)
                else:
                    fields_fn = _extension_fields(hyp, c, delimiter, lm, vocab)
                    bump(prefix + (c,), fields_fn, NEG_INF, total + logp)

        # drop prefixes whose whole mass moved elsewhere this frame, but
        # never evict the all-blank hypothesis
        alive = {p: h for p, h in nxt.items() if h.p_total != NEG_INF or p == ()}
        if not alive:
            alive = nxt
        if len(alive) > cfg.beam_width:
            ranked = sorted(
                alive.items(),
                key=lambda kv: (-running_score(kv[1]), _ids_to_text(kv[0], vocab)),
            )
            kept = dict(ranked[: cfg.beam_width])
            if () in alive and () not in kept:
                kept[()] = alive[()]
            beam = kept
        else:
            beam = alive

    finals: list[tuple[str, float]] = []
    for prefix, hyp in beam.items():
        text = _ids_to_text(prefix, vocab)
        score = hyp.p_total
        if lm is not None:
            lm_log10, n_words, _ = _advance_lm(hyp, lm, vocab)
            score += cfg.lm_weight * LOG10 * lm_log10 + cfg.word_bonus * n_words
        finals.append((text, score))
    finals.sort(key=lambda ts: (-ts[1], ts[0]))
    return finals[: cfg.beam_width]


def _extension_fields(hyp, c, delimiter, lm, vocab):
    """Lazy (lm_log10, n_words, history, partial) for prefix + (c,)."""

    def fields():
        if lm is None:
            return (0.0, 0, (), ())
        if c == delimiter:
            lm_log10, n_words, history = _advance_lm(hyp, lm, vocab)
            return (lm_log10, n_words, history, ())
        return (hyp.lm_log10, hyp.n_words, hyp.lm_history, hyp.partial + (c,))

    return fields


def batch_decode(
    posteriors: list[tuple[str, PosteriorMatrix]],
    vocab: Vocabulary,
    cfg: DecodeConfig | None = None,
    lm: NGramModel | None = None,
    greedy: bool = False,
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Decode utterances in order; per-utterance failures are collected.

    Returns (results, errors): results as (id, text) in input order,
    errors as (id, message).
    """
    results: list[tuple[str, str]] = []
    errors: list[tuple[str, str]] = []
    for utt_id, post in posteriors:
        try:
            if greedy:
                text = greedy_decode(post, vocab)
            else:
                text = beam_decode(post, vocab, cfg, lm)[0][0]
            results.append((utt_id, text))
        except Exception as exc:  # collected, not fatal
            errors.append((utt_id, str(exc)))
    return results, errors
