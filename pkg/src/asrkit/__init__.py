"""Speech-recognition decoding toolkit.

Text normalization, character vocabularies, word n-gram language models
(ARPA and binary formats, modified Kneser-Ney smoothing), CTC greedy and
prefix-beam decoding with optional shallow fusion, WER evaluation, and
desk-scale wav2vec2/XLSR encoder math with verifiable losses.
"""

__version__ = "0.1.0"

from . import corpus, ctc_decode, errors, metrics, ngram_lm, textnorm, xlsr_math  # noqa: F401
from .textnorm import Vocabulary, build_vocab, normalize  # noqa: F401
