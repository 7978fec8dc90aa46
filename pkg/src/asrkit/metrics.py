"""Word error rate and evaluation grids.

WER = (S + D + I) / N pooled over utterance counts, never the mean of
per-utterance rates. Both hypothesis and reference pass through
textnorm.normalize before alignment so scoring happens in the same
alphabet the decoder emits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyReference
from .textnorm import normalize


def word_edit_distance(reference: list[str], hypothesis: list[str]) -> tuple[int, int, int]:
    """Minimal (substitutions, deletions, insertions) aligning hyp to ref.

    Unit costs; among minimal alignments the backtrace prefers
    substitution over deletion over insertion. Raises EmptyReference
    when the reference has no words.
    """
    if not reference:
        raise EmptyReference("reference has zero words")
    n, m = len(reference), len(hypothesis)
    # dist[i][j] = cost of aligning reference[:i] with hypothesis[:j]
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        ref_word = reference[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ref_word != hypothesis[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)

    subs = dels = inss = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and dist[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]) == here:
            if reference[i - 1] != hypothesis[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            dels += 1
            i -= 1
        else:
            inss += 1
            j -= 1
    return subs, dels, inss


def char_edit_distance(reference: str, hypothesis: str) -> tuple[int, int, int]:
    """Character-level (S, D, I); bonus metric, same conventions as words."""
    if not reference:
        raise EmptyReference("reference has zero characters")
    return word_edit_distance(list(reference), list(hypothesis))


@dataclass
class UtteranceScore:
    id: str
    substitutions: int
    deletions: int
    insertions: int
    reference_words: int

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.reference_words


@dataclass
class WerReport:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    reference_words: int = 0
    per_utterance: list[UtteranceScore] = field(default_factory=list)

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.errors / self.reference_words


def corpus_wer(
    pairs: list[tuple[str, str]],
    ids: list[str] | None = None,
) -> WerReport:
    """Pool edit counts over (reference, hypothesis) text pairs.

    Inputs are raw strings; both sides are normalized before word
    splitting. References that normalize to nothing raise
    EmptyReference naming the utterance.
    """
    if not pairs:
        raise EmptyReference("empty pair list")
    if ids is None:
        ids = [str(i) for i in range(len(pairs))]
    report = WerReport()
    for utt_id, (ref_raw, hyp_raw) in zip(ids, pairs):
        ref = normalize(ref_raw).split()
        hyp = normalize(hyp_raw).split()
        if not ref:
            raise EmptyReference(f"utterance {utt_id!r}: reference has zero words")
        s, d, i = word_edit_distance(ref, hyp)
        report.substitutions += s
        report.deletions += d
        report.insertions += i
        report.reference_words += len(ref)
        report.per_utterance.append(UtteranceScore(utt_id, s, d, i, len(ref)))
    return report


MISSING_CELL = "–"  # en dash, as used for absent table cells


def format_wer(wer: float) -> str:
    return f"{wer * 100:.3f}%"


@dataclass
class GridReport:
    """Rows = LM configurations, columns = test sets, plus an AVG column."""

    row_names: list[str]
    col_names: list[str]
    cells: dict[tuple[str, str], WerReport]

    def _cell_text(self, row: str, col: str) -> str:
        rep = self.cells.get((row, col))
        return format_wer(rep.wer) if rep is not None else MISSING_CELL

    def _avg_text(self, row: str) -> str:
        present = [self.cells[(row, c)].wer for c in self.col_names if (row, c) in self.cells]
        if not present:
            return MISSING_CELL
        return format_wer(sum(present) / len(present))

    def render_csv(self) -> str:
        lines = [",".join(["lm_config"] + self.col_names + ["avg_wer"])]
        for row in self.row_names:
            cells = [self._cell_text(row, c) for c in self.col_names]
            lines.append(",".join([row] + cells + [self._avg_text(row)]))
        return "\n".join(lines) + "\n"

    def render_text(self) -> str:
        header = ["lm_config"] + self.col_names + ["avg_wer"]
        rows = [
            [row] + [self._cell_text(row, c) for c in self.col_names] + [self._avg_text(row)]
            for row in self.row_names
        ]
        widths = [
            max(len(header[k]), *(len(r[k]) for r in rows)) if rows else len(header[k])
            for k in range(len(header))
        ]
        out = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        for r in rows:
            out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        return "\n".join(out) + "\n"


def report_grid(
    results: dict[tuple[str, str], WerReport],
    test_sets: list[str] | None = None,
    lm_configs: list[str] | None = None,
) -> GridReport:
    """Arrange (test set, LM config) -> WerReport results as a grid.

    Declared axes may be passed explicitly so that cells that could not
    be computed still appear (rendered as a dash); otherwise row/column
    order follows first appearance in the mapping.
    """
    col_names = list(test_sets) if test_sets else []
    row_names = list(lm_configs) if lm_configs else []
    cells: dict[tuple[str, str], WerReport] = {}
    for (test_set, lm_config), report in results.items():
        if test_set not in col_names:
            col_names.append(test_set)
        if lm_config not in row_names:
            row_names.append(lm_config)
        cells[(lm_config, test_set)] = report
    return GridReport(row_names=row_names, col_names=col_names, cells=cells)
