"""CTC decoding: greedy, prefix beam search, and LM shallow fusion.

Builds posteriors where two words are acoustically tied and shows the
language model breaking the tie during beam search.
"""

import warnings

import numpy as np

from asrkit.ctc_decode import DecodeConfig, PosteriorMatrix, beam_decode, greedy_decode
from asrkit.ngram_lm import count_ngrams, estimate
from asrkit.textnorm import build_vocab, encode

corpus = ["halo dunia", "dunia indah", "halo kamu", "selamat pagi dunia"]
vocab = build_vocab(corpus)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    lm = estimate(count_ngrams(corpus, 2), smoothing="mkn")

# frames spelling "halo dun", then a frame torn between 'i' and 'a',
# then blank + 'a' -> "halo dunia" vs "halo dunaa" carry equal mass
ids = encode("halo dun", vocab)
v = len(vocab)
rows = []
for i in ids:
    row = np.zeros(v)
    row[i] = 1.0
    rows.append(row)
ambiguous = np.zeros(v)
ambiguous[vocab.token_to_id["i"]] = 0.5
ambiguous[vocab.token_to_id["a"]] = 0.5
rows.append(ambiguous)
blank = np.zeros(v)
blank[vocab.blank_id] = 1.0
rows.append(blank)
final_a = np.zeros(v)
final_a[vocab.token_to_id["a"]] = 1.0
rows.append(final_a)
post = PosteriorMatrix.from_probs(np.array(rows))

print(f"greedy decode:            {greedy_decode(post, vocab)!r}")

no_lm = beam_decode(post, vocab, DecodeConfig(beam_width=20))
print("\nbeam without LM (acoustic tie, lexicographic order wins):")
for text, score in no_lm[:3]:
    print(f"  {score:9.4f}  {text!r}")

fused = beam_decode(post, vocab, DecodeConfig(beam_width=20), lm=lm)
print("\nbeam with 2-gram fusion (the real word wins):")
for text, score in fused[:3]:
    print(f"  {score:9.4f}  {text!r}")

print("\nLM scores of the tied candidates (log10):")
for words in ("halo dunia", "halo dunaa"):
    print(f"  {words!r}: {lm.score_words(words.split()):8.3f}")
