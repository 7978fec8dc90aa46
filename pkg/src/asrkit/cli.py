"""Command-line entry point for the decoding pipeline.

Subcommands: manifest validate|split, normalize, build-vocab,
lm train|binary|query, decode, eval-wer, benchmark, xlsr frames|losscheck.
Every run can write a machine-readable JSON run log (tool version,
subcommand, argv, seed, outputs); outputs are byte-deterministic for a
fixed seed and flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import floor
from pathlib import Path
from random import Random

from . import __version__
from .corpus import SplitSpec, load_manifest, recombine_and_split, save_manifest, validate_audio
from .ctc_decode import DecodeConfig, PosteriorMatrix, batch_decode
from .errors import ToolkitError
from .metrics import corpus_wer, format_wer, report_grid
from .ngram_lm import count_ngrams, emit_arpa, estimate, parse_arpa, read_binary, write_binary
from .textnorm import Vocabulary, build_vocab, contains_digits, normalize
from .xlsr_math import EncoderConfig, frame_count, self_check

DEFAULT_SEED = 53


def _write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))


def _ensure_parent(path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)


def _write_run_log(args, outputs: list[str]) -> None:
    log_path = getattr(args, "run_log", None)
    if log_path is None:
        if not outputs:
            return
        log_path = str(outputs[0]) + ".runlog.json"
    obj = {
        "tool": "asrkit",
        "version": __version__,
        "subcommand": args._subcommand,
        "argv": args._argv,
        "seed": getattr(args, "seed", None),
        "outputs": [str(o) for o in outputs],
    }
    _write_text(log_path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _load_model(path: str):
    if str(path).endswith(".nglm"):
        return read_binary(path)
    return parse_arpa(path)


def _read_jsonl_texts(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            utt_id = str(obj["id"])
            if utt_id in table:
                raise ToolkitError(f"{path}:{lineno}: duplicate id {utt_id!r}")
            table[utt_id] = str(obj["text"])
    return table


# ---------------------------------------------------------------- manifest


def cmd_manifest_validate(args) -> int:
    records = load_manifest(args.infile)
    report = validate_audio(records)
    n_bad = len({i.record_id for i in report.flagged} | {i.record_id for i in report.io_errors})
    print(
        f"checked {report.checked} records: {report.checked - n_bad} ok, "
        f"{len(report.flagged)} flags, {len(report.io_errors)} io errors"
    )
    for issue in report.flagged:
        print(f"flag {issue.record_id} {issue.path}: {issue.message}")
    for issue in report.io_errors:
        print(f"io-error {issue.record_id} {issue.path}: {issue.message}")
    for source in sorted(report.duration_by_source):
        print(f"duration {source}: {report.duration_by_source[source]:.2f}s")
    for note in report.duration_warnings():
        print(f"warning: {note}", file=sys.stderr)
    outputs = []
    if args.out:
        obj = {
            "checked": report.checked,
            "flagged": [vars(i) for i in report.flagged],
            "io_errors": [vars(i) for i in report.io_errors],
            "duration_by_source": report.duration_by_source,
        }
        _write_text(args.out, json.dumps(obj, sort_keys=True, indent=2) + "\n")
        outputs.append(args.out)
    _write_run_log(args, outputs)
    return 0


def cmd_manifest_split(args) -> int:
    records = load_manifest(args.infile)
    pool_train = [r for r in records if r.subset == "train"]
    pool_val = [r for r in records if r.subset == "validation"]
    rest = [r for r in records if r.subset not in ("train", "validation")]
    spec = SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    new_train, new_val = recombine_and_split(pool_train, pool_val, spec)
    _ensure_parent(args.out)
    save_manifest(new_train + new_val + rest, args.out)
    print(
        f"recombined {len(pool_train)}+{len(pool_val)} records -> "
        f"{len(new_train)} train / {len(new_val)} validation"
    )
    _write_run_log(args, [args.out])
    return 0


# ---------------------------------------------------------------- text


def cmd_normalize(args) -> int:
    raw_lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    digit_lines = sum(1 for line in raw_lines if contains_digits(line))
    normalized = [normalize(line) for line in raw_lines]
    _write_text(args.out, "".join(line + "\n" for line in normalized))
    if digit_lines:
        print(
            f"warning: dropped digits from {digit_lines} of {len(raw_lines)} lines",
            file=sys.stderr,
        )
    print(f"normalized {len(raw_lines)} lines")
    _write_run_log(args, [args.out])
    return 0


def cmd_build_vocab(args) -> int:
    records = load_manifest(args.infile)
    subsets = set(args.subsets.split(","))
    texts = [normalize(r.transcript_raw) for r in records if r.subset in subsets]
    vocab = build_vocab(texts)
    _ensure_parent(args.out)
    vocab.save(args.out)
    print(f"vocabulary of {len(vocab)} tokens from {len(texts)} transcripts")
    _write_run_log(args, [args.out])
    return 0


# ---------------------------------------------------------------- lm


def cmd_lm_train(args) -> int:
    lines = [
        line for line in Path(args.infile).read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    if args.sample_fraction is not None:
        if not 0 < args.sample_fraction <= 1:
            raise ToolkitError("--sample-fraction must be in (0, 1]")
        keep = floor(args.sample_fraction * len(lines))
        picked = sorted(Random(args.seed).sample(range(len(lines)), keep))
        lines = [lines[i] for i in picked]
    counts = count_ngrams(lines, args.order, unk_threshold=args.unk_threshold, prune=args.prune)
    model = estimate(counts, smoothing=args.smoothing, k=args.k)
    _ensure_parent(args.arpa)
    emit_arpa(model, args.arpa)
    for n in range(1, model.order + 1):
        print(f"ngram {n}: {model.entry_count(n)} entries")
    for note in model.warnings:
        print(f"warning: {note}", file=sys.stderr)
    _write_run_log(args, [args.arpa])
    return 0


def cmd_lm_binary(args) -> int:
    model = parse_arpa(args.infile)
    _ensure_parent(args.out)
    write_binary(model, args.out)
    arpa_size = Path(args.infile).stat().st_size
    bin_size = Path(args.out).stat().st_size
    print(f"wrote {bin_size} bytes (ARPA was {arpa_size})")
    _write_run_log(args, [args.out])
    return 0


def cmd_lm_query(args) -> int:
    model = _load_model(args.model)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    rows = []
    for line in lines:
        words = line.split()
        rows.append({"text": line, "log10_prob": model.score_sentence(words)})
    payload = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    outputs = []
    if args.out:
        _write_text(args.out, payload)
        outputs.append(args.out)
    else:
        sys.stdout.write(payload)
    _write_run_log(args, outputs)
    return 0


# ---------------------------------------------------------------- decode


def _collect_posteriors(directory: str | Path) -> list[tuple[str, str]]:
    """(utterance id, ctcl path) pairs from an index or directory glob."""
    directory = Path(directory)
    index = directory / "index.jsonl"
    if index.exists():
        pairs = []
        with index.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                pairs.append((str(obj["id"]), str(directory / obj["file"])))
        return pairs
    return [(p.stem, str(p)) for p in sorted(directory.glob("*.ctcl"))]


def cmd_decode(args) -> int:
    vocab = Vocabulary.load(args.vocab)
    lm = _load_model(args.lm) if args.lm else None
    cfg = DecodeConfig(
        beam_width=args.beam,
        lm_weight=args.alpha,
        word_bonus=args.beta,
        prune_log_threshold=args.prune_log_threshold,
    )
    pairs = _collect_posteriors(args.posteriors)
    loaded = []
    load_errors = []
    for utt_id, path in pairs:
        try:
            loaded.append((utt_id, PosteriorMatrix.load(path)))
        except ToolkitError as exc:
            load_errors.append((utt_id, str(exc)))
    results, errors = batch_decode(loaded, vocab, cfg, lm, greedy=args.greedy)
    errors = load_errors + errors
    _write_text(
        args.out,
        "".join(
            json.dumps({"id": i, "text": t}, ensure_ascii=False, sort_keys=True) + "\n"
            for i, t in results
        ),
    )
    for utt_id, message in errors:
        print(f"error {utt_id}: {message}", file=sys.stderr)
    print(f"decoded {len(results)} utterances ({len(errors)} errors)")
    _write_run_log(args, [args.out])
    return 0


def cmd_eval_wer(args) -> int:
    refs = _read_jsonl_texts(args.refs)
    hyps = _read_jsonl_texts(args.hyps)
    missing = [i for i in refs if i not in hyps]
    if missing:
        raise ToolkitError(f"no hypothesis for ids: {', '.join(sorted(missing)[:5])}")
    ids = list(refs)
    report = corpus_wer([(refs[i], hyps[i]) for i in ids], ids=ids)
    lines = ["id,substitutions,deletions,insertions,reference_words,wer"]
    for u in report.per_utterance:
        lines.append(
            f"{u.id},{u.substitutions},{u.deletions},{u.insertions},"
            f"{u.reference_words},{format_wer(u.wer)}"
        )
    lines.append(
        f"TOTAL,{report.substitutions},{report.deletions},{report.insertions},"
        f"{report.reference_words},{format_wer(report.wer)}"
    )
    _write_text(args.out, "\n".join(lines) + "\n")
    print(
        f"WER {format_wer(report.wer)} "
        f"(S={report.substitutions} D={report.deletions} I={report.insertions} "
        f"N={report.reference_words})"
    )
    _write_run_log(args, [args.out])
    return 0


def cmd_benchmark(args) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    test_sets = config.get("test_sets", [])
    lm_configs = config.get("lm_configs", [])
    if not test_sets or not lm_configs:
        print("error: benchmark config needs test_sets and lm_configs", file=sys.stderr)
        return 1
    vocab = Vocabulary.load(config["vocab"])
    alpha = float(config.get("alpha", 0.5))
    beta = float(config.get("beta", 1.0))
    beam = int(config.get("beam", 100))

    results = {}
    for test_set in test_sets:
        set_name = test_set["name"]
        post_dir = Path(test_set["posteriors"])
        refs_path = Path(test_set["refs"])
        if not post_dir.is_dir() or not refs_path.exists():
            continue  # partial grid: cell stays missing
        refs = _read_jsonl_texts(refs_path)
        loaded = [
            (utt_id, PosteriorMatrix.load(path))
            for utt_id, path in _collect_posteriors(post_dir)
        ]
        for lm_config in lm_configs:
            cfg_name = lm_config["name"]
            lm = _load_model(lm_config["lm"]) if lm_config.get("lm") else None
            cfg = DecodeConfig(beam_width=beam, lm_weight=alpha, word_bonus=beta)
            hyp_pairs, _ = batch_decode(
                loaded, vocab, cfg, lm, greedy=bool(lm_config.get("greedy"))
            )
            hyps = dict(hyp_pairs)
            ids = [i for i in refs if i in hyps]
            if not ids:
                continue
            results[(set_name, cfg_name)] = corpus_wer(
                [(refs[i], hyps[i]) for i in ids], ids=ids
            )
    if not results:
        print("error: no benchmark cells could be computed", file=sys.stderr)
        return 1
    grid = report_grid(
        results,
        test_sets=[t["name"] for t in test_sets],
        lm_configs=[c["name"] for c in lm_configs],
    )
    _write_text(args.out_csv, grid.render_csv())
    _write_text(args.out_text, grid.render_text())
    sys.stdout.write(grid.render_text())
    _write_run_log(args, [args.out_csv, args.out_text])
    return 0


# ---------------------------------------------------------------- xlsr


def cmd_xlsr_frames(args) -> int:
    cfg = EncoderConfig()
    frames = frame_count(args.samples, cfg)
    hop_ms = cfg.hop_samples / cfg.sample_rate_hz * 1000
    rf_ms = cfg.receptive_field_samples / cfg.sample_rate_hz * 1000
    print(
        f"samples={args.samples} frames={frames} "
        f"hop={cfg.hop_samples} samples ({hop_ms:.0f} ms) "
        f"receptive_field={cfg.receptive_field_samples} samples ({rf_ms:.0f} ms)"
    )
    _write_run_log(args, [])
    return 0


def cmd_xlsr_losscheck(args) -> int:
    rows = self_check(args.seed)
    width = max(len(name) for name, _, _ in rows)
    failures = 0
    for name, ok, detail in rows:
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"{name.ljust(width)}  {status}  {detail}")
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    _write_run_log(args, [])
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asrkit",
        description="Speech decoding toolkit: normalization, n-gram LMs, CTC decoding, WER.",
    )
    parser.add_argument("--version", action="version", version=f"asrkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=False):
        p.add_argument("--run-log", default=None, help="write the JSON run log here")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    manifest = sub.add_parser("manifest", help="manifest tooling").add_subparsers(
        dest="subcommand", required=True
    )
    p = manifest.add_parser("validate", help="check audio metadata and files")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None, help="write a JSON report")
    add_common(p)
    p.set_defaults(func=cmd_manifest_validate, _subcommand="manifest validate")

    p = manifest.add_parser("split", help="recombine train+validation and re-split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-fraction", type=float, default=0.9)
    add_common(p, seed=True)
    p.set_defaults(func=cmd_manifest_split, _subcommand="manifest split")

    p = sub.add_parser("normalize", help="normalize transcript text lines")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_normalize, _subcommand="normalize")

    p = sub.add_parser("build-vocab", help="character vocabulary from a manifest")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--subsets", default="train,validation")
    add_common(p)
    p.set_defaults(func=cmd_build_vocab, _subcommand="build-vocab")

    lm = sub.add_parser("lm", help="language model tooling").add_subparsers(
        dest="subcommand", required=True
    )
    p = lm.add_parser("train", help="count n-grams and estimate a model")
    p.add_argument("--in", dest="infile", required=True, help="normalized text, one sentence/line")
    p.add_argument("--arpa", required=True, help="output ARPA path")
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--smoothing", choices=["mkn", "add_k"], default="mkn")
    p.add_argument("--k", type=float, default=1.0, help="additive constant for add_k")
    p.add_argument("--unk-threshold", type=int, default=1)
    p.add_argument("--prune", type=int, default=0, help="drop n-grams with count <= this")
    p.add_argument("--sample-fraction", type=float, default=None)
    add_common(p, seed=True)
    p.set_defaults(func=cmd_lm_train, _subcommand="lm train")

    p = lm.add_parser("binary", help="convert ARPA to the NGLM binary format")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_lm_binary, _subcommand="lm binary")

    p = lm.add_parser("query", help="score sentences with a model")
    p.add_argument("--model", required=True, help=".arpa or .nglm file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    add_common(p)
    p.set_defaults(func=cmd_lm_query, _subcommand="lm query")

    p = sub.add_parser("decode", help="CTC decode posterior matrices")
    p.add_argument("--posteriors", required=True, help="directory of .ctcl files")
    p.add_argument("--vocab", required=True)
    p.add_argument("--lm", default=None, help="optional .arpa/.nglm for shallow fusion")
    p.add_argument("--alpha", type=float, default=0.5, help="LM weight")
    p.add_argument("--beta", type=float, default=1.0, help="word insertion bonus")
    p.add_argument("--beam", type=int, default=100)
    p.add_argument("--prune-log-threshold", type=float, default=-9.21)
    p.add_argument("--greedy", action="store_true", help="argmax decoding instead of beam")
    p.add_argument("--out", required=True, help="hypotheses JSONL")
    add_common(p)
    p.set_defaults(func=cmd_decode, _subcommand="decode")

    p = sub.add_parser("eval-wer", help="word error rate from refs/hyps JSONL")
    p.add_argument("--refs", required=True)
    p.add_argument("--hyps", required=True)
    p.add_argument("--out", required=True, help="CSV report")
    add_common(p)
    p.set_defaults(func=cmd_eval_wer, _subcommand="eval-wer")

    p = sub.add_parser("benchmark", help="decode+eval grid over LM configs and test sets")
    p.add_argument("--config", required=True, help="JSON grid description")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-text", required=True)
    add_common(p)
    p.set_defaults(func=cmd_benchmark, _subcommand="benchmark")

    xlsr = sub.add_parser("xlsr", help="encoder math utilities").add_subparsers(
        dest="subcommand", required=True
    )
    p = xlsr.add_parser("frames", help="frame count for a sample length")
    p.add_argument("--samples", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_xlsr_frames, _subcommand="xlsr frames")

    p = xlsr.add_parser("losscheck", help="run the quantizer/loss verification battery")
    add_common(p, seed=True)
    p.set_defaults(func=cmd_xlsr_losscheck, _subcommand="xlsr losscheck")

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
