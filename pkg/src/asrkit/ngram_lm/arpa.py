"""ARPA text format: emission and parsing.

Layout:

    \\data\\
    ngram 1=<count>
    ...

    \\1-grams:
    <log10 prob>\\t<w1 ... wn>\\t<log10 backoff>
    ...

    \\end\\

The backoff column is omitted at the top order and whenever it is
zero. Zero-probability sentinel entries (log10 <= -99) are not
emitted, except the conventional <s> unigram.
"""

from __future__ import annotations

import re
from pathlib import Path

from ..errors import CountMismatch, ParseError
from .counts import BOS
from .model import SENTINEL_LOG10, NGramModel

_SECTION_RE = re.compile(r"\\(\d+)-grams:$")


def _fmt(x: float) -> str:
    # 9 significant digits: enough for exact float32 text round trips.
    return f"{x:.9g}"


def _emittable(model: NGramModel, n: int) -> list[tuple[tuple[str, ...], float, float]]:
    rows = []
    for ids, lp, bow in sorted(model.ngrams_ids(n)):
        gram = tuple(model.words[i] for i in ids)
        if lp <= SENTINEL_LOG10 and gram != (BOS,):
            continue
        rows.append((gram, lp, bow))
    return rows


def emit_arpa(model: NGramModel, path: str | Path) -> None:
    sections = {n: _emittable(model, n) for n in range(1, model.order + 1)}
    lines = ["\\data\\"]
    for n in range(1, model.order + 1):
        lines.append(f"ngram {n}={len(sections[n])}")
    lines.append("")
    for n in range(1, model.order + 1):
        lines.append(f"\\{n}-grams:")
        for gram, lp, bow in sections[n]:
            if n < model.order and bow != 0.0:
                lines.append(f"{_fmt(lp)}\t{' '.join(gram)}\t{_fmt(bow)}")
            else:
                lines.append(f"{_fmt(lp)}\t{' '.join(gram)}")
        lines.append("")
    lines.append("\\end\\")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def parse_arpa(path: str | Path) -> NGramModel:
    """Parse an ARPA file into a queryable model.

    Raises ParseError with a line number for malformed content and
    CountMismatch when a section's size disagrees with the header.
    """
    path = Path(path)
    declared: dict[int, int] = {}
    tables: dict[int, dict[tuple[int, ...], tuple[float, float]]] = {}
    word_ids: dict[str, int] = {}

    def wid(word: str) -> int:
        if word not in word_ids:
            word_ids[word] = len(word_ids)
        return word_ids[word]

    state = "preamble"
    section = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").strip()
            if not line:
                continue
            if line == "\\data\\":
                state = "header"
                continue
            if line == "\\end\\":
                state = "done"
                break
            m = _SECTION_RE.match(line)
            if m:
                section = int(m.group(1))
                if section not in declared:
                    raise ParseError(
                        f"section \\{section}-grams: not declared in \\data\\ header",
                        path=str(path),
                        line=lineno,
                    )
                tables.setdefault(section, {})
                state = "section"
                continue
            if state == "header":
                hm = re.match(r"ngram (\d+)\s*=\s*(\d+)$", line)
                if not hm:
                    raise ParseError(f"bad header line {line!r}", path=str(path), line=lineno)
                declared[int(hm.group(1))] = int(hm.group(2))
                continue
            if state == "section":
                fields = line.split()
                if len(fields) not in (section + 1, section + 2):
                    raise ParseError(
                        f"expected {section}-gram entry, got {len(fields)} fields",
                        path=str(path),
                        line=lineno,
                    )
                try:
                    lp = float(fields[0])
                    bow = float(fields[-1]) if len(fields) == section + 2 else 0.0
                except ValueError as exc:
                    raise ParseError(f"bad number: {exc}", path=str(path), line=lineno) from exc
                gram = tuple(wid(w) for w in fields[1 : section + 1])
                tables[section][gram] = (lp, bow)
                continue
            raise ParseError(f"unexpected line {line!r}", path=str(path), line=lineno)

    if state != "done":
        raise ParseError("missing \\end\\ marker", path=str(path))
    if not declared:
        raise ParseError("missing \\data\\ header", path=str(path))
    order = max(declared)
    for n, want in declared.items():
        got = len(tables.get(n, {}))
        if got != want:
            raise CountMismatch(
                f"{path}: header declares ngram {n}={want} but section has {got} entries"
            )
    words = [w for w, _ in sorted(word_ids.items(), key=lambda kv: kv[1])]
    return NGramModel(order, words, tables)
