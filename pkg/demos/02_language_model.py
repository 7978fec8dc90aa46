"""Word n-gram language models: counting, smoothing, ARPA, binary format.

Trains small models on a toy corpus, shows how probability mass is
spread by modified Kneser-Ney vs plain maximum likelihood, and walks
the two serialization formats.
"""

import tempfile
import warnings
from pathlib import Path

from asrkit.ngram_lm import count_ngrams, emit_arpa, estimate, parse_arpa, read_binary, write_binary
from asrkit.synthetic import grammar_sentences

corpus = grammar_sentences(120, seed=7)
print(f"corpus: {len(corpus)} sentences, e.g. {corpus[0]!r}, {corpus[-1]!r}")

counts = count_ngrams(corpus, order=3)
for n in range(1, 4):
    print(f"distinct {n}-grams: {len(counts.ngrams[n])}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    mkn = estimate(counts, smoothing="mkn")
    mle = estimate(counts, smoothing="add_k", k=0.0)

print("\n== seen vs unseen under each smoother (log10) ==")
seen = ("saya", "makan")
unseen = ("saya", "sayur")
for name, model in (("kneser-ney", mkn), ("mle", mle)):
    print(
        f"{name:11} P({seen[1]}|{seen[0]}) = {model.score_word([seen[0]], seen[1]):8.4f}   "
        f"P({unseen[1]}|{unseen[0]}) = {model.score_word([unseen[0]], unseen[1]):9.4f}"
    )
print("(MLE gives unseen continuations ~0; Kneser-Ney reserves mass for them)")

print("\n== sentence scoring ==")
for sentence in ("saya makan nasi", "nasi makan saya", "blah blah blah"):
    print(f"{sentence!r:24} -> {mkn.score_sentence(sentence.split()):8.3f}")

with tempfile.TemporaryDirectory() as tmp:
    arpa = Path(tmp) / "demo.arpa"
    nglm = Path(tmp) / "demo.nglm"
    emit_arpa(mkn, arpa)
    write_binary(parse_arpa(arpa), nglm)
    print("\n== serialization ==")
    print(f"ARPA text:   {arpa.stat().st_size:6d} bytes")
    print(f"NGLM binary: {nglm.stat().st_size:6d} bytes")
    head = arpa.read_text().splitlines()[:8]
    print("ARPA head:")
    for line in head:
        print(f"  {line}")
    loaded = read_binary(nglm)
    probe = loaded.score_word(["saya"], "makan")
    print(f"binary round trip query bit-equal: {probe == mkn.score_word(['saya'], 'makan')}")
