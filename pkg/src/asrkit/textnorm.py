"""Transcript normalization and character-vocabulary construction.

Normalized text contains only lowercase a-z and single spaces. The
vocabulary maps every character seen in the training/validation
transcripts to an id, with " " represented by the word delimiter "|"
and the special tokens "[UNK]" (unknown) and "[PAD]" (CTC blank)
appended at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyCorpus

WORD_DELIMITER = "|"
UNK_TOKEN = "[UNK]"
PAD_TOKEN = "[PAD]"

_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyz")


def normalize(raw: str) -> str:
    """Lowercase, keep only a-z and spaces, collapse whitespace runs.

    Non-alphabetic characters (digits, punctuation, accented letters)
    are deleted without inserting a space. The result may be empty.
    """
    kept = []
    for ch in raw.lower():
        if ch in _LETTERS:
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
    return " ".join("".join(kept).split())


def contains_digits(raw: str) -> bool:
    """True if the raw transcript carries digits that normalize() will drop."""
    return any(ch.isdigit() for ch in raw)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token table for CTC decoding.

    delimiter_id/unk_id/blank_id are indices into `tokens`; they are
    None only for ad-hoc token sets built by hand (e.g. tiny decoder
    tests). `build_vocab` always populates all three.
    """

    tokens: tuple[str, ...]
    delimiter_id: int | None
    unk_id: int | None
    blank_id: int

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        if " " in self.tokens:
            raise ValueError("vocabulary must not contain a literal space token")
        if not 0 <= self.blank_id < len(self.tokens):
            raise ValueError("blank_id out of range")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def token_to_id(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    def token_text(self, token_id: int) -> str:
        """Text rendering of one token: "|" -> space, specials -> ""."""
        tok = self.tokens[token_id]
        if token_id == self.delimiter_id:
            return " "
        if len(tok) == 1:
            return tok
        return ""

    def save(self, path: str | Path) -> None:
        """One token per line, line number = id, UTF-8, LF endings."""
        data = "".join(tok + "\n" for tok in self.tokens)
        Path(path).write_bytes(data.encode("utf-8"))

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        text = Path(path).read_bytes().decode("utf-8")
        tokens = tuple(line for line in text.split("\n") if line != "")
        ids = {tok: i for i, tok in enumerate(tokens)}
        if PAD_TOKEN not in ids:
            raise ValueError(f"{path}: vocabulary has no {PAD_TOKEN} token")
        return cls(
            tokens=tokens,
            delimiter_id=ids.get(WORD_DELIMITER),
            unk_id=ids.get(UNK_TOKEN),
            blank_id=ids[PAD_TOKEN],
        )


def build_vocab(transcripts: list[str]) -> Vocabulary:
    """Collect distinct characters of normalized transcripts into a vocabulary.

    Characters are sorted by codepoint (space already mapped to "|",
    which sorts after z), then "[UNK]" and "[PAD]" are appended. Raises
    EmptyCorpus when no transcript contributes any character.
    """
    if not transcripts or all(t == "" for t in transcripts):
        raise EmptyCorpus("no characters found in any transcript")
    chars: set[str] = set()
    for text in transcripts:
        chars.update(text.replace(" ", WORD_DELIMITER))
    chars.add(WORD_DELIMITER)
    tokens = tuple(sorted(chars)) + (UNK_TOKEN, PAD_TOKEN)
    ids = {tok: i for i, tok in enumerate(tokens)}
    return Vocabulary(
        tokens=tokens,
        delimiter_id=ids[WORD_DELIMITER],
        unk_id=ids[UNK_TOKEN],
        blank_id=ids[PAD_TOKEN],
    )


def encode(text: str, vocab: Vocabulary) -> list[int]:
    """Map normalized text to token ids; spaces -> delimiter, OOV -> unk."""
    table = vocab.token_to_id
    out = []
    for ch in text:
        if ch == " ":
            out.append(vocab.delimiter_id)
        else:
            out.append(table.get(ch, vocab.unk_id))
    return out


def decode(ids: list[int], vocab: Vocabulary) -> str:
    """Inverse of encode for in-vocab text; delimiter maps back to space."""
    return "".join(vocab.token_text(i) for i in ids)
