import json
import warnings
from pathlib import Path

import pytest

from asrkit.cli import main
from asrkit.synthetic import make_benchmark
from asrkit.textnorm import Vocabulary

# tiny corpora legitimately trigger the sparse-count discount fallback;
# the CLI already reports it on stderr
pytestmark = pytest.mark.filterwarnings(
    "ignore::asrkit.errors.DegenerateStatisticsWarning"
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_manifest(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def manifest_row(i, subset="train", transcript="halo dunia"):
    return {
        "id": f"utt{i:04d}",
        "audio_path": f"missing/utt{i:04d}.wav",
        "transcript": transcript,
        "duration_s": 1.0,
        "sample_rate_hz": 16000,
        "speaker_id": "spk0",
        "source": "other",
        "subset": subset,
    }


@pytest.fixture
def bench_dir(tmp_path):
    """Synthetic corpus rendered to disk: corpus.txt, vocab, posteriors, refs."""
    bench = make_benchmark(n_train=60, n_test=10, seed=53)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("".join(s + "\n" for s in bench.train_corpus))
    vocab = tmp_path / "vocab.txt"
    bench.vocab.save(vocab)
    post_dir = tmp_path / "posteriors"
    post_dir.mkdir()
    for utt_id, post in bench.posteriors:
        post.save(post_dir / f"{utt_id}.ctcl")
    refs = tmp_path / "refs.jsonl"
    with refs.open("w") as fh:
        for utt_id, text in zip(bench.test_ids, bench.test_references):
            fh.write(json.dumps({"id": utt_id, "text": text}) + "\n")
    return tmp_path


class TestUsageErrors:
    def test_unknown_flag_exits_2_and_names_it(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["normalize", "--in", "x", "--out", "y", "--bogus"])
        assert exc.value.code == 2
        assert "--bogus" in capsys.readouterr().err

    def test_missing_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_runtime_error_exits_1(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "normalize", "--in", str(tmp_path / "nope.txt"), "--out", "y"
        )
        assert code == 1
        assert "error" in err


class TestNormalize:
    def test_writes_normalized_lines_and_digit_warning(self, capsys, tmp_path):
        src = tmp_path / "raw.txt"
        src.write_text("Halo, Dunia!\nada 2 buku\n")
        out = tmp_path / "norm.txt"
        code, stdout, err = run(capsys, "normalize", "--in", str(src), "--out", str(out))
        assert code == 0
        assert out.read_text() == "halo dunia\nada buku\n"
        assert "2 lines" in stdout
        assert "digits" in err
        log = json.loads(Path(str(out) + ".runlog.json").read_text())
        assert log["subcommand"] == "normalize"


class TestVocabAndManifest:
    def test_build_vocab(self, capsys, tmp_path):
        manifest = tmp_path / "m.jsonl"
        write_manifest(
            manifest,
            [
                manifest_row(0, "train", "Halo Dunia"),
                manifest_row(1, "validation", "halo kamu!"),
                manifest_row(2, "test", "zzz not included"),
            ],
        )
        out = tmp_path / "vocab.txt"
        code, _, _ = run(capsys, "build-vocab", "--in", str(manifest), "--out", str(out))
        assert code == 0
        vocab = Vocabulary.load(out)
        assert "z" not in vocab.tokens  # test subset not used
        assert vocab.tokens[-2:] == ("[UNK]", "[PAD]")

    def test_manifest_validate_reports_missing_files(self, capsys, tmp_path):
        manifest = tmp_path / "m.jsonl"
        write_manifest(manifest, [manifest_row(0)])
        report = tmp_path / "report.json"
        code, stdout, _ = run(
            capsys, "manifest", "validate", "--in", str(manifest), "--out", str(report)
        )
        assert code == 0
        assert "1 io errors" in stdout
        assert json.loads(report.read_text())["checked"] == 1

    def test_manifest_split_counts(self, capsys, tmp_path):
        manifest = tmp_path / "m.jsonl"
        write_manifest(
            manifest,
            [manifest_row(i, "train" if i < 6 else "validation") for i in range(10)],
        )
        out = tmp_path / "split.jsonl"
        code, stdout, _ = run(
            capsys,
            "manifest", "split", "--in", str(manifest), "--out", str(out),
            "--train-fraction", "0.9", "--seed", "53",
        )
        assert code == 0
        assert "9 train / 1 validation" in stdout
        subsets = [json.loads(line)["subset"] for line in out.read_text().splitlines()]
        assert subsets.count("train") == 9 and subsets.count("validation") == 1


class TestLmCommands:
    def test_train_binary_query(self, capsys, tmp_path, bench_dir):
        arpa = tmp_path / "lm.arpa"
        code, stdout, _ = run(
            capsys,
            "lm", "train", "--in", str(bench_dir / "corpus.txt"),
            "--arpa", str(arpa), "--order", "3",
        )
        assert code == 0
        assert "ngram 3:" in stdout

        nglm = tmp_path / "lm.nglm"
        code, _, _ = run(capsys, "lm", "binary", "--in", str(arpa), "--out", str(nglm))
        assert code == 0

        sentences = tmp_path / "q.txt"
        sentences.write_text("saya makan nasi\nnasi nasi nasi\n")
        out = tmp_path / "scores.jsonl"
        code, _, _ = run(
            capsys, "lm", "query", "--model", str(nglm), "--in", str(sentences),
            "--out", str(out),
        )
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert rows[0]["log10_prob"] > rows[1]["log10_prob"]

    def test_sample_fraction_subsets_lines(self, capsys, tmp_path, bench_dir):
        arpa = tmp_path / "s.arpa"
        code, stdout, _ = run(
            capsys,
            "lm", "train", "--in", str(bench_dir / "corpus.txt"), "--arpa", str(arpa),
            "--order", "1", "--sample-fraction", "0.5", "--seed", "1",
        )
        assert code == 0


class TestPipeline:
    def test_fusion_beats_greedy_end_to_end(self, capsys, tmp_path, bench_dir):
        # full chain through the CLI, starting from raw (cased, punctuated)
        # transcripts: normalize -> build-vocab -> lm train/binary ->
        # decode (greedy and fused) -> eval-wer
        normalized_lines = (bench_dir / "corpus.txt").read_text().splitlines()
        raw = tmp_path / "raw.txt"
        raw.write_text("".join(line.capitalize() + "!\n" for line in normalized_lines))
        corpus = tmp_path / "corpus.txt"
        code, _, _ = run(capsys, "normalize", "--in", str(raw), "--out", str(corpus))
        assert code == 0
        assert corpus.read_bytes() == (bench_dir / "corpus.txt").read_bytes()

        manifest = tmp_path / "m.jsonl"
        write_manifest(
            manifest,
            [manifest_row(i, "train", line.capitalize() + "!")
             for i, line in enumerate(normalized_lines)],
        )
        vocab = tmp_path / "vocab.txt"
        code, _, _ = run(capsys, "build-vocab", "--in", str(manifest), "--out", str(vocab))
        assert code == 0
        # the posteriors were rendered against exactly this vocabulary
        assert vocab.read_bytes() == (bench_dir / "vocab.txt").read_bytes()

        arpa = tmp_path / "lm.arpa"
        nglm = tmp_path / "lm.nglm"
        run(capsys, "lm", "train", "--in", str(corpus),
            "--arpa", str(arpa), "--order", "5")
        run(capsys, "lm", "binary", "--in", str(arpa), "--out", str(nglm))

        greedy_hyps = tmp_path / "greedy.jsonl"
        run(capsys, "decode", "--posteriors", str(bench_dir / "posteriors"),
            "--vocab", str(vocab), "--greedy", "--out", str(greedy_hyps))
        fused_hyps = tmp_path / "fused.jsonl"
        run(capsys, "decode", "--posteriors", str(bench_dir / "posteriors"),
            "--vocab", str(vocab), "--lm", str(nglm),
            "--alpha", "0.5", "--beta", "1.0", "--beam", "100",
            "--out", str(fused_hyps))

        def wer_of(hyps):
            report = tmp_path / f"{hyps.stem}.csv"
            code, stdout, _ = run(
                capsys, "eval-wer", "--refs", str(bench_dir / "refs.jsonl"),
                "--hyps", str(hyps), "--out", str(report),
            )
            assert code == 0
            return float(stdout.split("WER ")[1].split("%")[0])

        greedy_wer = wer_of(greedy_hyps)
        fused_wer = wer_of(fused_hyps)
        assert fused_wer < greedy_wer

    def test_eval_wer_identical_files(self, capsys, tmp_path, bench_dir):
        report = tmp_path / "r.csv"
        code, stdout, _ = run(
            capsys, "eval-wer", "--refs", str(bench_dir / "refs.jsonl"),
            "--hyps", str(bench_dir / "refs.jsonl"), "--out", str(report),
        )
        assert code == 0
        assert "WER 0.000%" in stdout
        assert report.read_text().splitlines()[-1].endswith("0.000%")


class TestBenchmark:
    def make_config(self, tmp_path, bench_dir, lm_paths):
        lm_configs = [{"name": "none"}]
        for name, path in lm_paths:
            lm_configs.append({"name": name, "lm": str(path)})
        config = {
            "vocab": str(bench_dir / "vocab.txt"),
            "test_sets": [
                {
                    "name": "synthetic",
                    "posteriors": str(bench_dir / "posteriors"),
                    "refs": str(bench_dir / "refs.jsonl"),
                },
                {
                    "name": "missing_set",
                    "posteriors": str(bench_dir / "no_such_dir"),
                    "refs": str(bench_dir / "refs.jsonl"),
                },
            ],
            "lm_configs": lm_configs,
            "beam": 50,
        }
        path = tmp_path / "bench.json"
        path.write_text(json.dumps(config))
        return path

    def test_grid_rows_and_missing_cells(self, capsys, tmp_path, bench_dir):
        lms = []
        for order in (2, 3):
            arpa = tmp_path / f"lm{order}.arpa"
            run(capsys, "lm", "train", "--in", str(bench_dir / "corpus.txt"),
                "--arpa", str(arpa), "--order", str(order))
            lms.append((f"{order}-gram", arpa))
        config = self.make_config(tmp_path, bench_dir, lms)
        out_csv = tmp_path / "grid.csv"
        out_text = tmp_path / "grid.txt"
        code, stdout, _ = run(
            capsys, "benchmark", "--config", str(config),
            "--out-csv", str(out_csv), "--out-text", str(out_text),
        )
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0].split(",")[0] == "lm_config"
        assert [line.split(",")[0] for line in lines[1:]] == ["none", "2-gram", "3-gram"]
        assert "–" in out_csv.read_text()  # the missing test set column
        assert "synthetic" in stdout

    def test_empty_config_exits_1(self, capsys, tmp_path):
        config = tmp_path / "empty.json"
        config.write_text(json.dumps({"vocab": "x", "test_sets": [], "lm_configs": []}))
        code, _, err = run(
            capsys, "benchmark", "--config", str(config),
            "--out-csv", str(tmp_path / "g.csv"), "--out-text", str(tmp_path / "g.txt"),
        )
        assert code == 1
        assert "test_sets" in err


class TestXlsr:
    def test_frames(self, capsys):
        code, stdout, _ = run(capsys, "xlsr", "frames", "--samples", "16000")
        assert code == 0
        assert "frames=49" in stdout

    def test_frames_too_short_is_runtime_error(self, capsys):
        code, _, err = run(capsys, "xlsr", "frames", "--samples", "100")
        assert code == 1
        assert "receptive field" in err

    def test_losscheck_all_pass(self, capsys):
        code, stdout, _ = run(capsys, "xlsr", "losscheck", "--seed", "53")
        assert code == 0
        assert "10/10 checks passed" in stdout
        assert "FAIL" not in stdout


class TestRunLogs:
    def test_round_trip_reproduces_artifacts(self, capsys, tmp_path, bench_dir):
        out = tmp_path / "norm.txt"
        src = tmp_path / "raw.txt"
        src.write_text("Halo Dunia\n")
        argv = ["normalize", "--in", str(src), "--out", str(out)]
        assert main(argv) == 0
        capsys.readouterr()
        first = out.read_bytes()
        log = json.loads(Path(str(out) + ".runlog.json").read_text())
        out.unlink()
        assert main(log["argv"]) == 0
        capsys.readouterr()
        assert out.read_bytes() == first
        assert log["version"]
