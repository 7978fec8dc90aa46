"""Binary model format ("NGLM"): compact, load without text parsing.

Layout, all little-endian:

    magic           4 bytes  "NGLM"
    version         u32      (currently 1)
    order           u8
    word count      u32
    words           per word: u32 byte length, then UTF-8 bytes
    per order n = 1..order:
        entry count u64
        entries     sorted ascending by id tuple, each:
                    n x u32 word ids (context first, predicted word last),
                    f32 log10 prob, f32 log10 backoff

Scores survive the round trip bit-for-bit because models quantize all
log10 values to float32 on construction.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import BadMagic, TruncatedFile, VersionMismatch
from .model import NGramModel

MAGIC = b"NGLM"
VERSION = 1


def _entry_dtype(n: int) -> np.dtype:
    return np.dtype([("ids", "<u4", (n,)), ("lp", "<f4"), ("bow", "<f4")])


def write_binary(model: NGramModel, path: str | Path) -> None:
    chunks = [MAGIC, struct.pack("<IB", VERSION, model.order)]
    chunks.append(struct.pack("<I", len(model.words)))
    for word in model.words:
        data = word.encode("utf-8")
        chunks.append(struct.pack("<I", len(data)) + data)
    for n in range(1, model.order + 1):
        entries = sorted(model.ngrams_ids(n))
        chunks.append(struct.pack("<Q", len(entries)))
        arr = np.empty(len(entries), dtype=_entry_dtype(n))
        for i, (ids, lp, bow) in enumerate(entries):
            arr[i] = (ids, lp, bow)
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_binary(path: str | Path) -> NGramModel:
    data = Path(path).read_bytes()
    offset = 0

    def take(size: int) -> bytes:
        nonlocal offset
        if offset + size > len(data):
            raise TruncatedFile(f"{path}: expected {size} more bytes at offset {offset}")
        chunk = data[offset : offset + size]
        offset += size
        return chunk

    if take(4) != MAGIC:
        raise BadMagic(f"{path}: not an NGLM file")
    version, order = struct.unpack("<IB", take(5))
    if version != VERSION:
        raise VersionMismatch(f"{path}: format version {version}, expected {VERSION}")
    (word_count,) = struct.unpack("<I", take(4))
    words = []
    for _ in range(word_count):
        (length,) = struct.unpack("<I", take(4))
        words.append(take(length).decode("utf-8"))
    tables: dict[int, dict[tuple[int, ...], tuple[float, float]]] = {}
    for n in range(1, order + 1):
        (count,) = struct.unpack("<Q", take(8))
        dtype = _entry_dtype(n)
        block = take(count * dtype.itemsize)
        arr = np.frombuffer(block, dtype=dtype)
        id_rows = arr["ids"].tolist()
        lps = arr["lp"].astype(np.float64).tolist()
        bows = arr["bow"].astype(np.float64).tolist()
        tables[n] = {
            tuple(ids): (lp, bow) for ids, lp, bow in zip(id_rows, lps, bows)
        }
    return NGramModel(order, words, tables)
