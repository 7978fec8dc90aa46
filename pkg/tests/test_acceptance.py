"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; tolerances are fixed here and nowhere else.
"""

import itertools
import json
import math
import struct
import warnings
from pathlib import Path

import numpy as np
import pytest

from asrkit.cli import main
from asrkit.corpus import SplitSpec, UtteranceRecord, recombine_and_split
from asrkit.ctc_decode import DecodeConfig, PosteriorMatrix, batch_decode, beam_decode
from asrkit.errors import BadMagic, TruncatedFile, VersionMismatch
from asrkit.metrics import corpus_wer, word_edit_distance
from asrkit.ngram_lm import (
    count_ngrams,
    emit_arpa,
    estimate,
    parse_arpa,
    read_binary,
    write_binary,
)
from asrkit.synthetic import make_benchmark
from asrkit.textnorm import Vocabulary
from asrkit.xlsr_math import (
    ContrastiveBatch,
    EncoderConfig,
    contrastive_loss,
    diversity_loss,
    frame_count,
    gumbel_softmax,
)
from oracles import (
    conv_stack_output_length,
    ctc_best_string,
    finite_difference_gradient,
    min_edit_cost,
)


def quiet_model(corpus, order, smoothing="mkn", k=1.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return estimate(count_ngrams(corpus, order), smoothing=smoothing, k=k)


def test_c1_wer_oracle_equivalence():
    """All word pairs with lengths <= 4 over a 3-word alphabet, exactly."""
    alphabet = ["a", "b", "c"]
    seqs = [
        tuple(seq)
        for n in range(0, 5)
        for seq in itertools.product(alphabet, repeat=n)
    ]
    refs = [s for s in seqs if s]
    pairs = 0
    for ref in refs:
        for hyp in seqs:
            s, d, i = word_edit_distance(list(ref), list(hyp))
            assert s + d + i == min_edit_cost(ref, hyp), (ref, hyp)
            pairs += 1
    assert pairs == 120 * 121
    print(f"\n[criterion 1] PASS - DP distance equals brute force on {pairs} pairs")


def test_c2_ctc_beam_exactness():
    """100 seeded posteriors, T <= 4, V <= 3: beam top == exhaustive oracle."""
    matches = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        frames = int(rng.integers(1, 5))
        vocab_size = int(rng.integers(2, 4))
        logits = rng.uniform(-3, 3, size=(frames, vocab_size))
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        post = PosteriorMatrix.from_probs(probs)
        letters = "ab"[: vocab_size - 1]
        vocab = Vocabulary(
            tokens=tuple(letters) + ("[PAD]",),
            delimiter_id=None,
            unk_id=None,
            blank_id=vocab_size - 1,
        )
        got = beam_decode(post, vocab, DecodeConfig(beam_width=200))[0][0]
        want = ctc_best_string(post.log_probs, vocab.blank_id, list(letters) + [""])
        assert got == want, (seed, got, want)
        matches += 1
    print(f"\n[criterion 2] PASS - beam top string matches the oracle on {matches}/100 seeds")


def test_c3_lm_normalization(toy_corpus):
    """Sum over the full vocab of P(w|h) = 1 +- 1e-6 for every history."""
    checked = 0
    for order in (1, 2, 3, 4, 5):
        counts = count_ngrams(toy_corpus, order)
        histories = {()}
        for n in range(1, order):
            histories.update(counts.ngrams[n].keys())
        for smoothing, k in (("mkn", 0.0), ("add_k", 0.5), ("add_k", 0.0)):
            model = quiet_model(toy_corpus, order, smoothing=smoothing, k=k)
            for history in histories:
                total = sum(10 ** model.score_word(list(history), w) for w in model.words)
                assert abs(total - 1.0) <= 1e-6, (order, smoothing, history, total)
                checked += 1
    print(f"\n[criterion 3] PASS - {checked} conditional distributions sum to 1 +- 1e-6")


def test_c4_format_round_trips(tmp_path, toy_corpus):
    """estimate -> ARPA -> parse within 1e-6; ARPA -> binary -> read bitwise."""
    probes = [
        ([], "saya"), ([], "<unk>"), (["saya"], "makan"), (["makan"], "zzz"),
        (["makan", "nasi"], "</s>"), (["zzz", "qqq"], "buku"), (["buku", "tua"], "saya"),
    ]
    for smoothing, k in (("mkn", 1.0), ("add_k", 0.5)):
        model = quiet_model(toy_corpus, 3, smoothing=smoothing, k=k)
        arpa = tmp_path / f"{smoothing}.arpa"
        emit_arpa(model, arpa)
        parsed = parse_arpa(arpa)
        for history, word in probes:
            assert parsed.score_word(history, word) == pytest.approx(
                model.score_word(history, word), abs=1e-6
            )
        nglm = tmp_path / f"{smoothing}.nglm"
        write_binary(parsed, nglm)
        loaded = read_binary(nglm)
        for history, word in probes:
            assert loaded.score_word(history, word) == parsed.score_word(history, word)
        for n in range(1, 4):
            got = {ids: v for ids, *v in loaded.ngrams_ids(n)}
            want = {ids: v for ids, *v in parsed.ngrams_ids(n)}
            assert got == want

    nglm = tmp_path / "mkn.nglm"
    data = nglm.read_bytes()
    bad_magic = tmp_path / "bad_magic.nglm"
    bad_magic.write_bytes(b"ZZZZ" + data[4:])
    with pytest.raises(BadMagic):
        read_binary(bad_magic)
    bad_version = tmp_path / "bad_version.nglm"
    bad_version.write_bytes(data[:4] + struct.pack("<I", 77) + data[8:])
    with pytest.raises(VersionMismatch):
        read_binary(bad_version)
    truncated = tmp_path / "truncated.nglm"
    truncated.write_bytes(data[: len(data) // 2])
    with pytest.raises(TruncatedFile):
        read_binary(truncated)
    print("\n[criterion 4] PASS - text round trip <= 1e-6, binary bit-identical, "
          "corrupted headers raise BadMagic/VersionMismatch/TruncatedFile")


def test_c5_directional_lm_gain():
    """5-gram fusion cuts greedy WER by >= 20% relative; orders 2..5 ordered."""
    bench = make_benchmark(n_train=200, n_test=40, seed=53)
    refs = bench.test_references

    def wer_of(hyp_pairs):
        hyps = [t for _, t in hyp_pairs]
        return corpus_wer(list(zip(refs, hyps))).wer

    greedy_pairs, errors = batch_decode(bench.posteriors, bench.vocab, greedy=True)
    assert not errors
    greedy_wer = wer_of(greedy_pairs)

    order_wer = {}
    cfg = DecodeConfig(beam_width=100, lm_weight=0.5, word_bonus=1.0)
    for order in (2, 3, 4, 5):
        lm = quiet_model(bench.train_corpus, order)
        pairs, errors = batch_decode(bench.posteriors, bench.vocab, cfg, lm)
        assert not errors
        order_wer[order] = wer_of(pairs)

    assert greedy_wer > 0, "noise model must corrupt something"
    reduction = (greedy_wer - order_wer[5]) / greedy_wer
    assert order_wer[5] <= greedy_wer
    assert reduction >= 0.20, (greedy_wer, order_wer)
    for lo, hi in ((2, 3), (3, 4), (4, 5)):
        assert order_wer[hi] <= order_wer[lo] + 0.01, order_wer  # within one point
    print(
        f"\n[criterion 5] PASS - greedy WER {greedy_wer:.1%}, 5-gram fusion "
        f"{order_wer[5]:.1%} (relative reduction {reduction:.0%}); "
        f"orders 2..5: {[f'{order_wer[o]:.1%}' for o in (2, 3, 4, 5)]}"
    )


def test_c6_encoder_geometry():
    """frame_count anchors and full agreement with the layer simulation."""
    cfg = EncoderConfig()
    assert frame_count(400, cfg) == 1
    assert frame_count(16000, cfg) == 49
    for n in range(400, 2001):
        assert frame_count(n, cfg) == conv_stack_output_length(n, cfg.kernels, cfg.strides)
    print("\n[criterion 6] PASS - 400 -> 1 frame, 16000 -> 49 frames, "
          "simulation agreement on N in 400..2000")


def test_c7_quantizer_and_losses():
    """Gumbel/contrastive/diversity anchors at their stated tolerances."""
    rng = np.random.default_rng(53)
    for _ in range(200):
        probs, _ = gumbel_softmax(rng.normal(size=11), tau=0.6, rng=rng)
        assert abs(probs.sum() - 1.0) <= 1e-9

    hits = 0
    for draw in range(1000):
        _, onehot = gumbel_softmax(
            np.array([10.0, 0.0, 0.0]), tau=0.01, rng=9_000 + draw, hard=True
        )
        hits += int(onehot.argmax() == 0)
    assert hits >= 995

    c = np.array([1.0, 0.0, 0.0, 0.0])
    q = np.array([0.3, 0.1, 0.0, 0.0])
    loss, _ = contrastive_loss(ContrastiveBatch(c, q, np.tile(q, (100, 1)), 0.4))
    assert abs(loss - math.log(101.0)) <= 1e-9

    worst = 0.0
    for _ in range(50):
        batch = ContrastiveBatch(
            context=rng.normal(size=8),
            positive=rng.normal(size=8),
            negatives=rng.normal(size=(int(rng.integers(1, 101)), 8)),
            temperature=float(rng.uniform(0.1, 1.2)),
        )
        _, grad = contrastive_loss(batch)

        def loss_of(x, b=batch):
            return contrastive_loss(ContrastiveBatch(x, b.positive, b.negatives,
                                                     b.temperature))[0]

        fd = finite_difference_gradient(loss_of, batch.context, h=1e-5)
        worst = max(worst, np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12))
    assert worst < 1e-4

    assert diversity_loss(np.full((2, 5), 0.2)) == pytest.approx(0.0, abs=1e-12)
    for _ in range(100):
        p = rng.dirichlet(np.ones(5), size=2)
        assert 0.0 <= diversity_loss(p) <= 2.0 + 1e-12
    onehot_p = np.zeros((2, 5))
    onehot_p[:, 0] = 1.0
    assert diversity_loss(onehot_p) == pytest.approx(2.0)
    print(f"\n[criterion 7] PASS - gumbel sum 1e-9, one-hot limit {hits}/1000, "
          f"ln(101) anchor, gradient rel err {worst:.1e} < 1e-4, diversity in [0, G]")


def test_c8_split_recipe():
    """2130 + 1835 records at 0.9 give exactly 3569/396 for any seed."""

    def rec(i):
        return UtteranceRecord(
            id=f"u{i:05d}", audio_path=f"{i}.wav", transcript_raw="x",
            duration_s=1.0, sample_rate_hz=16000, speaker_id="s",
            source="common_voice", subset="train",
        )

    train = [rec(i) for i in range(2130)]
    val = [rec(10_000 + i) for i in range(1835)]
    for seed in (0, 1, 7, 53, 123456789, 2**63 - 1):
        new_train, new_val = recombine_and_split(train, val, SplitSpec(0.9, seed))
        assert (len(new_train), len(new_val)) == (3569, 396), seed
    print("\n[criterion 8] PASS - 3965 records split 3569/396 across 6 seeds")


@pytest.fixture(scope="module")
def determinism_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("determinism")
    bench = make_benchmark(n_train=60, n_test=8, seed=53)

    (root / "raw.txt").write_text("Halo, Dunia!\nada 2 buku di-pasar\n")
    (root / "corpus.txt").write_text("".join(s + "\n" for s in bench.train_corpus))
    (root / "sentences.txt").write_text("saya makan nasi\nnasi nasi nasi\n")

    rows = []
    for i, text in enumerate(bench.train_corpus):
        rows.append({
            "id": f"t{i:04d}", "audio_path": f"missing/t{i:04d}.wav",
            "transcript": text, "duration_s": 1.0, "sample_rate_hz": 16000,
            "speaker_id": "spk0", "source": "other",
            "subset": "train" if i % 2 else "validation",
        })
    (root / "manifest.jsonl").write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    )

    post_dir = root / "posteriors"
    post_dir.mkdir()
    for utt_id, post in bench.posteriors:
        post.save(post_dir / f"{utt_id}.ctcl")
    with (root / "refs.jsonl").open("w") as fh:
        for utt_id, text in zip(bench.test_ids, bench.test_references):
            fh.write(json.dumps({"id": utt_id, "text": text}) + "\n")

    (root / "bench.json").write_text(json.dumps({
        "vocab": str(root / "vocab.txt"),
        "test_sets": [{"name": "synthetic", "posteriors": str(post_dir),
                       "refs": str(root / "refs.jsonl")}],
        "lm_configs": [{"name": "none"}, {"name": "3-gram", "lm": str(root / "lm.arpa")}],
        "beam": 50,
    }))
    return root


class TestC9Determinism:
    """Every CLI subcommand, run twice with identical flags, byte-identical."""

    def run_twice(self, capsys, argv, outputs, expect=0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(argv) == expect
        first_out = capsys.readouterr().out
        snapshot = {p: Path(p).read_bytes() for p in outputs}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert main(argv) == expect
        assert capsys.readouterr().out == first_out
        for p in outputs:
            assert Path(p).read_bytes() == snapshot[p], f"{p} changed between runs"

    def test_every_subcommand_is_deterministic(self, capsys, determinism_workspace):
        w = determinism_workspace
        runs = [
            (["normalize", "--in", str(w / "raw.txt"), "--out", str(w / "norm.txt")],
             [w / "norm.txt", str(w / "norm.txt") + ".runlog.json"]),
            (["build-vocab", "--in", str(w / "manifest.jsonl"), "--out", str(w / "vocab.txt")],
             [w / "vocab.txt"]),
            (["manifest", "validate", "--in", str(w / "manifest.jsonl"),
              "--out", str(w / "report.json")], [w / "report.json"]),
            (["manifest", "split", "--in", str(w / "manifest.jsonl"),
              "--out", str(w / "split.jsonl"), "--train-fraction", "0.9", "--seed", "53"],
             [w / "split.jsonl"]),
            (["lm", "train", "--in", str(w / "corpus.txt"), "--arpa", str(w / "lm.arpa"),
              "--order", "3", "--seed", "53"], [w / "lm.arpa"]),
            (["lm", "binary", "--in", str(w / "lm.arpa"), "--out", str(w / "lm.nglm")],
             [w / "lm.nglm"]),
            (["lm", "query", "--model", str(w / "lm.nglm"), "--in", str(w / "sentences.txt"),
              "--out", str(w / "scores.jsonl")], [w / "scores.jsonl"]),
            (["decode", "--posteriors", str(w / "posteriors"), "--vocab", str(w / "vocab.txt"),
              "--lm", str(w / "lm.nglm"), "--alpha", "0.5", "--beta", "1.0",
              "--beam", "100", "--out", str(w / "hyps.jsonl")], [w / "hyps.jsonl"]),
            (["eval-wer", "--refs", str(w / "refs.jsonl"), "--hyps", str(w / "hyps.jsonl"),
              "--out", str(w / "wer.csv")], [w / "wer.csv"]),
            (["benchmark", "--config", str(w / "bench.json"), "--out-csv", str(w / "grid.csv"),
              "--out-text", str(w / "grid.txt")], [w / "grid.csv", w / "grid.txt"]),
            (["xlsr", "frames", "--samples", "16000"], []),
            (["xlsr", "losscheck", "--seed", "53"], []),
        ]
        for argv, outputs in runs:
            self.run_twice(capsys, argv, [str(p) for p in outputs])
        print(f"\n[criterion 9] PASS - {len(runs)} subcommands byte-identical across reruns")
