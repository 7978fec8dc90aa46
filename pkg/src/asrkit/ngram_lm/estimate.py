"""Smoothing: interpolated modified Kneser-Ney and add-k estimation.

Both estimators produce a backoff model: explicit entries carry the
full (interpolated) conditional probability of observed n-grams and
each history's backoff weight redistributes the reserved mass over the
lower order, so every conditional distribution sums to one exactly.
"""

from __future__ import annotations

import math
import warnings as _warnings
from collections import defaultdict

from ..errors import DegenerateStatisticsWarning, EmptyCorpus
from .counts import BOS, NGramCounts
from .model import SENTINEL_LOG10, NGramModel

FALLBACK_DISCOUNT = 0.75


def estimate(counts: NGramCounts, smoothing: str = "mkn", k: float = 1.0) -> NGramModel:
    """Turn counts into a queryable model.

    smoothing="mkn" uses interpolated modified Kneser-Ney with
    Chen-Goodman discounts (per-order fallback to a flat 0.75 discount
    when counts-of-counts are too sparse, recorded as a warning).
    smoothing="add_k" adds `k` to every count; k=0 is plain maximum
    likelihood for observed events.
    """
    if counts.sentence_count == 0 or not counts.ngrams.get(1):
        raise EmptyCorpus("no counts to estimate from")
    if smoothing == "mkn":
        cond, bows, warns = _estimate_mkn(counts)
    elif smoothing == "add_k":
        if k < 0:
            raise ValueError("k must be >= 0")
        cond, bows, warns = _estimate_add_k(counts, k)
    else:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    return _assemble(counts, cond, bows, tuple(counts.warnings) + warns)


def _chen_goodman_discounts(values: list[int]) -> tuple[tuple[float, float, float], bool]:
    """(D1, D2, D3+) from counts-of-counts; flag True when falling back."""
    n = [0, 0, 0, 0, 0]
    for v in values:
        if 1 <= v <= 4:
            n[v] += 1
    if min(n[1], n[2], n[3], n[4]) == 0:
        return (FALLBACK_DISCOUNT,) * 3, True
    y = n[1] / (n[1] + 2 * n[2])
    d1 = 1 - 2 * y * n[2] / n[1]
    d2 = 2 - 3 * y * n[3] / n[2]
    d3 = 3 - 4 * y * n[4] / n[3]
    if not (0 < d1 <= 1 and 0 < d2 <= 2 and 0 < d3 <= 3):
        return (FALLBACK_DISCOUNT,) * 3, True
    return (d1, d2, d3), False


def _discount_for(count: int, d: tuple[float, float, float]) -> float:
    if count <= 0:
        return 0.0
    if count == 1:
        return d[0]
    if count == 2:
        return d[1]
    return d[2]


def _adjusted_counts(counts: NGramCounts) -> dict[int, dict[tuple[str, ...], int]]:
    """Continuation counts for orders below the top; raw for <s>-initial grams.

    The highest order always keeps raw counts. A lower-order gram's
    adjusted count is the number of distinct words preceding it in the
    corpus, except when it starts with <s> (nothing can precede <s>).
    """
    order = counts.order
    adj = {order: dict(counts.ngrams[order])}
    for n in range(order - 1, 0, -1):
        predecessors: dict[tuple[str, ...], set[str]] = defaultdict(set)
        for gram in counts.ngrams[n + 1]:
            predecessors[gram[1:]].add(gram[0])
        level = {}
        for gram, raw in counts.ngrams[n].items():
            if gram[0] == BOS:
                level[gram] = raw
            else:
                level[gram] = len(predecessors.get(gram, ()))
        adj[n] = level
    return adj


def _estimate_mkn(counts: NGramCounts):
    order = counts.order
    adj = _adjusted_counts(counts)
    vpred = [w for w in counts.vocab if w != BOS]
    warns: list[str] = []

    def order_discounts(n: int) -> tuple[float, float, float]:
        values = [c for g, c in adj[n].items() if g[-1] != BOS]
        d, degenerate = _chen_goodman_discounts(values)
        if degenerate:
            msg = (
                f"order {n}: counts-of-counts too sparse for Chen-Goodman "
                f"discounts, using fixed discount {FALLBACK_DISCOUNT}"
            )
            warns.append(msg)
            _warnings.warn(msg, DegenerateStatisticsWarning, stacklevel=4)
        return d

    cond: dict[int, dict[tuple[str, ...], float]] = {n: {} for n in range(1, order + 1)}
    bows: dict[int, dict[tuple[str, ...], float]] = {}

    # Unigrams interpolate with the uniform distribution over vpred, so
    # every word (including the zero-count <unk>) gets positive mass.
    d1 = order_discounts(1)
    uni_counts = {w: adj[1].get((w,), 0) for w in vpred}
    total = sum(uni_counts.values())
    if total == 0:
        raise EmptyCorpus("no unigram mass left to estimate from")
    reserved = sum(_discount_for(c, d1) for c in uni_counts.values())
    gamma_uni = reserved / total
    uniform = 1.0 / len(vpred)
    for w, c in uni_counts.items():
        cond[1][(w,)] = (c - _discount_for(c, d1)) / total + gamma_uni * uniform

    for n in range(2, order + 1):
        dn = order_discounts(n)
        by_history: dict[tuple[str, ...], dict[str, int]] = defaultdict(dict)
        for gram, c in adj[n].items():
            by_history[gram[:-1]][gram[-1]] = c
        gammas: dict[tuple[str, ...], float] = {}
        for history, continuations in by_history.items():
            c_total = sum(continuations.values())
            if c_total == 0:
                # only reachable when pruning emptied the history
                continue
            reserved = sum(_discount_for(c, dn) for c in continuations.values())
            gamma = reserved / c_total
            gammas[history] = gamma
            lower_history = history[1:]
            for w, c in continuations.items():
                lower = cond[n - 1][lower_history + (w,)]
                cond[n][history + (w,)] = (c - _discount_for(c, dn)) / c_total + gamma * lower
        bows[n - 1] = gammas

    return cond, bows, tuple(warns)


def _estimate_add_k(counts: NGramCounts, k: float):
    order = counts.order
    vpred = [w for w in counts.vocab if w != BOS]
    v_size = len(vpred)

    cond: dict[int, dict[tuple[str, ...], float]] = {n: {} for n in range(1, order + 1)}
    bows: dict[int, dict[tuple[str, ...], float]] = {}

    uni_counts = {w: counts.ngrams[1].get((w,), 0) for w in vpred}
    total = sum(uni_counts.values())
    for w, c in uni_counts.items():
        cond[1][(w,)] = (c + k) / (total + k * v_size)

    for n in range(2, order + 1):
        by_history: dict[tuple[str, ...], dict[str, int]] = defaultdict(dict)
        for gram, c in counts.ngrams[n].items():
            by_history[gram[:-1]][gram[-1]] = c
        gammas: dict[tuple[str, ...], float] = {}
        for history, continuations in by_history.items():
            c_total = sum(continuations.values())
            denom = c_total + k * v_size
            lower_history = history[1:]
            lower_mass = 0.0
            for w, c in continuations.items():
                cond[n][history + (w,)] = (c + k) / denom
                lower_mass += cond[n - 1][lower_history + (w,)]
            # Mass reserved for unseen continuations, spread over the
            # lower-order distribution restricted to unseen words.
            leftover = k * (v_size - len(continuations)) / denom
            remaining = 1.0 - lower_mass
            gammas[history] = leftover / remaining if remaining > 1e-12 else 0.0
        bows[n - 1] = gammas

    return cond, bows, ()


def _assemble(counts, cond, bows, warns) -> NGramModel:
    word_ids = {w: i for i, w in enumerate(counts.vocab)}
    tables: dict[int, dict[tuple[int, ...], tuple[float, float]]] = {}
    for n in range(1, counts.order + 1):
        table = {}
        for gram, p in cond[n].items():
            ids = tuple(word_ids[w] for w in gram)
            lp = math.log10(p) if p > 0 else SENTINEL_LOG10
            bow = bows.get(n, {}).get(gram)
            if bow is None:
                lb = 0.0
            elif bow > 0:
                lb = math.log10(bow)
            else:
                lb = SENTINEL_LOG10
            table[ids] = (lp, lb)
        tables[n] = table
    # <s> is never predicted: sentinel probability, real backoff weight.
    bos_bow = bows.get(1, {}).get((BOS,))
    if bos_bow is not None and bos_bow > 0:
        bos_lb = math.log10(bos_bow)
    elif bos_bow is not None:
        bos_lb = SENTINEL_LOG10
    else:
        bos_lb = 0.0
    tables[1][(word_ids[BOS],)] = (SENTINEL_LOG10, bos_lb)
    return NGramModel(counts.order, counts.vocab, tables, warns)
