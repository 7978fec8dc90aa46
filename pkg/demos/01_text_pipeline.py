"""Transcript normalization and character vocabulary construction.

Raw transcripts come with casing, punctuation, and digits; the acoustic
model only ever sees lowercase a-z plus a word delimiter. This walks a
few transcripts through the cleanup and builds the token table a CTC
model would be trained against.
"""

from asrkit.textnorm import build_vocab, decode, encode, normalize

RAW = [
    "Halo, Dunia!",
    "  SAYA   pergi...ke-pasar ",
    "Ada 2 buku di rumah.",
    "Mereka membaca koran;  dia menulis surat",
]

print("== normalization ==")
normalized = []
for raw in RAW:
    clean = normalize(raw)
    normalized.append(clean)
    print(f"{raw!r:45} -> {clean!r}")

print("\n== vocabulary ==")
vocab = build_vocab(normalized)
print(f"{len(vocab)} tokens: {' '.join(vocab.tokens)}")
print(f"delimiter={vocab.delimiter_id} unk={vocab.unk_id} blank={vocab.blank_id}")

print("\n== encode / decode round trip ==")
text = normalized[0]
ids = encode(text, vocab)
print(f"{text!r} -> {ids} -> {decode(ids, vocab)!r}")

unknown = "hola señor"
print(f"{unknown!r} -> {encode(normalize(unknown), vocab)}  (OOV chars map to unk)")
