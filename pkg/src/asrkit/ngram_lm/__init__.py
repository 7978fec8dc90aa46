"""Word n-gram language models: counting, smoothing, ARPA and binary IO."""

from .counts import BOS, EOS, UNK, NGramCounts, count_ngrams
from .model import SENTINEL_LOG10, NGramModel
from .estimate import estimate
from .arpa import emit_arpa, parse_arpa
from .binary import read_binary, write_binary

__all__ = [
    "BOS",
    "EOS",
    "UNK",
    "SENTINEL_LOG10",
    "NGramCounts",
    "NGramModel",
    "count_ngrams",
    "estimate",
    "emit_arpa",
    "parse_arpa",
    "read_binary",
    "write_binary",
]
