"""Command-line entry point.

Subcommands cover the full pipeline at desk scale:

    artikit synth      emit a synthetic corpus + ground-truth manifest
    artikit prepare    corpus -> balanced train / val / test sample sets
    artikit train      SGD training with best-epoch checkpointing
    artikit finetune   continue from a checkpoint at fine-tune defaults
    artikit score      GOP-style scores for a sample set
    artikit evaluate   classification / detection / per-speaker reports
    artikit sweep      detection metrics across a threshold grid
    artikit agreement  Krippendorff's alpha + Cohen's kappa grid from ratings
    artikit serve      run the annotation HTTP service

Every subcommand writes into its --out directory (refusing to reuse a
non-empty one without --force) and drops a resolved config.json snapshot,
so a (config, seed) pair reproduces outputs byte for byte. Exit codes:
0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classes import CLASSES
from .errors import ArtikitError

USAGE_EXIT = 2
FAILURE_EXIT = 1


class UsageError(Exception):
    pass


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return FAILURE_EXIT


def _require_inputs(*paths) -> None:
    for path in paths:
        if path is None:
            continue
        if not Path(path).exists():
            raise UsageError(f"input does not exist: {path}")


DATA_DIR_ENV = "ARTIKIT_DATA_DIR"


def _prepare_out_dir(args) -> Path:
    out = Path(args.out)
    base = os.environ.get(DATA_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    if out.exists() and any(out.iterdir()) and not args.force:
        raise ArtikitError(f"output directory {out} is not empty (use --force to overwrite)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _snapshot_config(args, out: Path) -> None:
    resolved = {k: (str(v) if isinstance(v, Path) else v)
                for k, v in sorted(vars(args).items()) if k != "func"}
    (out / "config.json").write_text(json.dumps(resolved, sort_keys=True, indent=2) + "\n",
                                     encoding="utf-8")


def _json_out(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _add_out_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory for this run")
    p.add_argument("--force", action="store_true", help="allow writing into a non-empty directory")


def _speaker_list(text: str) -> list[str]:
    return [s for s in text.split(",") if s]


# ------------------------------------------------------------------ synth

def cmd_synth(args) -> int:
    from .synthetic import SyntheticSpec, generate_synthetic_corpus
    out = _prepare_out_dir(args)
    error_map = {}
    for pair in args.error_map or []:
        labeled, _, rendered = pair.partition(":")
        error_map[labeled] = rendered
    spec = SyntheticSpec(
        speakers=args.speakers, utterances_per_speaker=args.utterances,
        phones_per_utterance=args.phones, ultrasound_fps=args.fps,
        scanlines=args.scanlines, echoes=args.echoes, error_rate=args.error_rate,
        error_map=error_map, session_label=args.session,
        speaker_prefix=args.speaker_prefix, first_frame_time=args.first_frame_time)
    generate_synthetic_corpus(spec, args.seed, out)
    _snapshot_config(args, out)
    print(f"wrote synthetic corpus: {args.speakers} speakers x {args.utterances} utterances -> {out}")
    return 0


# ---------------------------------------------------------------- prepare

def cmd_prepare(args) -> int:
    _require_inputs(args.corpus)
    from .corpus import load_corpus, split_corpus
    from .features import BalancePolicy, MfccConfig
    from .features.pipeline import build_balanced_samples, build_corpus_samples, save_samples

    out = _prepare_out_dir(args)
    corpus = load_corpus(Path(args.corpus))
    speakers = corpus.speakers()
    if args.train_speakers or args.val_speakers or args.test_speakers:
        train_s = _speaker_list(args.train_speakers or "")
        val_s = _speaker_list(args.val_speakers or "")
        test_s = _speaker_list(args.test_speakers or "")
    else:
        if len(speakers) < 3:
            return _fail("corpus has fewer than 3 speakers; pass explicit speaker splits")
        train_s, val_s, test_s = speakers[:-2], speakers[-2:-1], speakers[-1:]
    train_c, val_c, test_c = split_corpus(corpus, train_s, val_s, test_s)

    mfcc = MfccConfig()
    cache = Path(args.mfcc_cache) if args.mfcc_cache else None
    policy = BalancePolicy(per_class_cap=args.cap)
    train_samples = build_balanced_samples(train_c, policy, args.seed, mfcc, cache)
    val_samples = build_corpus_samples(val_c, mfcc, cache)
    test_samples = build_corpus_samples(test_c, mfcc, cache)
    save_samples(out / "train.samples", train_samples)
    save_samples(out / "val.samples", val_samples)
    save_samples(out / "test.samples", test_samples)

    def counts(samples):
        by = {c: 0 for c in CLASSES}
        for s in samples:
            by[s.label] += 1
        return by

    _json_out(out / "counts.json", {
        "train": counts(train_samples), "val": counts(val_samples),
        "test": counts(test_samples), "dropped_instances": corpus.dropped_instances,
        "speakers": {"train": sorted(train_s), "val": sorted(val_s), "test": sorted(test_s)},
    })
    _snapshot_config(args, out)
    print(f"prepared {len(train_samples)}/{len(val_samples)}/{len(test_samples)} "
          f"train/val/test samples -> {out}")
    return 0


# ------------------------------------------------------------------ train

def _arch_from_args(args, sample):
    from .nnet import ArchitectureConfig
    return ArchitectureConfig(
        ultrasound_channels=sample.ultrasound_stack.shape[0],
        ultrasound_height=sample.ultrasound_stack.shape[1],
        ultrasound_width=sample.ultrasound_stack.shape[2],
        audio_frames=sample.audio_stack.shape[0],
        audio_dim=sample.audio_stack.shape[1],
        conv1_filters=args.conv1_filters, conv2_filters=args.conv2_filters,
        audio_fc_width=args.audio_fc_width,
        hidden_fc_widths=(args.hidden_width, args.hidden_width))


def _write_epoch_log(path: Path, history) -> None:
    lines = ["epoch,train_loss,val_accuracy"]
    lines += [f"{e.epoch},{e.train_loss!r},{e.val_accuracy!r}" for e in history]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_training(args, mode: str, pretrained=None) -> int:
    from .features.pipeline import load_samples
    from .nnet import TrainConfig, init_model, save_checkpoint, train, finetune

    out = _prepare_out_dir(args)
    train_samples = load_samples(Path(args.train))
    val_samples = load_samples(Path(args.val))
    config = TrainConfig(mode=mode, learning_rate=args.lr, epochs=args.epochs,
                         minibatch=args.minibatch, l2_weight=args.l2, seed=args.seed)
    if pretrained is None:
        model = init_model(_arch_from_args(args, train_samples[0]), seed=args.seed)
        best, history = train(model, train_samples, val_samples, config)
    else:
        best, history = finetune(pretrained, train_samples, val_samples, config)
    save_checkpoint(best, out / "model.ckpt")
    _write_epoch_log(out / "epochs.csv", history)
    _snapshot_config(args, out)
    acc = "n/a" if best.val_accuracy is None else f"{best.val_accuracy:.4f}"
    print(f"best epoch {best.epoch} val_accuracy {acc} -> {out / 'model.ckpt'}")
    return 0


def cmd_train(args) -> int:
    _require_inputs(args.train, args.val)
    return _run_training(args, args.mode)


def cmd_finetune(args) -> int:
    _require_inputs(args.checkpoint, args.train, args.val)
    from .nnet import load_checkpoint
    pretrained = load_checkpoint(Path(args.checkpoint))
    return _run_training(args, "finetune", pretrained=pretrained)


# ------------------------------------------------------------------ score

def _score_samples(checkpoint: Path, samples_path: Path, expected: str,
                   competing: str | None, k: float):
    from .features.pipeline import load_samples
    from .nnet import load_checkpoint, predict_proba
    from .scoring import ScoreRecord, model_score

    model = load_checkpoint(checkpoint)
    samples = load_samples(samples_path)
    targets = [s for s in samples if s.label == expected]
    probs = predict_proba(model, targets) if targets else []
    records = []
    for sample, post in zip(targets, probs):
        s_m, comp = model_score(post, expected, competing)
        records.append(ScoreRecord(
            utt_id=sample.utterance_id, phone_index=sample.phone_index,
            speaker=sample.speaker_id, expected=expected, competing=comp,
            s_m=s_m, k=k))
    return model, samples, records


def cmd_score(args) -> int:
    _require_inputs(args.checkpoint, args.samples)
    from .scoring import write_score_csv
    out = _prepare_out_dir(args)
    _, _, records = _score_samples(Path(args.checkpoint), Path(args.samples),
                                   args.expected, args.competing, args.k)
    if not records:
        return _fail(f"no samples labeled {args.expected!r} in {args.samples}")
    write_score_csv(out / "scores.csv", records)
    _snapshot_config(args, out)
    print(f"scored {len(records)} {args.expected} instances -> {out / 'scores.csv'}")
    return 0


# ----------------------------------------------------- expert label joins

def _attach_expert_labels(records, args):
    """Fill b_expert from a ground-truth manifest or a clear-case ratings CSV."""
    from .agreement import RatingsTable
    from .synthetic import load_truth

    if args.truth:
        truth = load_truth(Path(args.truth))
        kept = []
        for r in records:
            entry = truth.get((r.utt_id, r.phone_index))
            if entry is None:
                continue
            labeled, rendered = entry
            r.b_expert = int(rendered != labeled)
            kept.append(r)
        return kept
    if args.ratings:
        table = RatingsTable.from_csv(Path(args.ratings))
        by_item: dict[str, int] = {}
        for annotator in sorted(table.first_ratings()):
            for item, value in table.first_ratings()[annotator].items():
                by_item.setdefault(item, int(value))
        kept = []
        for r in records:
            item_id = f"{r.utt_id}:{r.phone_index}"
            if item_id in by_item:
                r.b_expert = by_item[item_id]
                kept.append(r)
        return kept
    return []


def _add_expert_args(p) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--truth", help="synthetic ground-truth manifest (truth.tsv)")
    group.add_argument("--ratings", help="ratings CSV with binary expert values "
                                         "(e.g. the service export with value=clear)")


# --------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    _require_inputs(args.checkpoint, args.samples, args.truth, args.ratings)
    from .evaluation import (classify_report, detection_report_from_records,
                             per_speaker_report, speaker_report_text)
    from .features.pipeline import load_samples
    from .nnet import load_checkpoint
    from .scoring import write_score_csv

    out = _prepare_out_dir(args)
    model = load_checkpoint(Path(args.checkpoint))
    samples = load_samples(Path(args.samples))
    if not samples:
        return _fail(f"no samples in {args.samples}")

    cls_report = classify_report(model, samples)
    _json_out(out / "classification.json", cls_report.to_json())
    (out / "classification.txt").write_text(cls_report.to_text() + "\n", encoding="utf-8")

    summary = {"global_accuracy": cls_report.global_accuracy}
    if args.truth or args.ratings:
        _, _, records = _score_samples(Path(args.checkpoint), Path(args.samples),
                                       args.expected, args.competing, args.k)
        records = _attach_expert_labels(records, args)
        if not records:
            return _fail("no scored instances matched the expert label source")
        write_score_csv(out / "scores.csv", records)
        det = detection_report_from_records(records)
        _json_out(out / "detection.json", det.to_json())
        (out / "detection.txt").write_text(det.to_text() + "\n", encoding="utf-8")
        rows = per_speaker_report(records)
        _json_out(out / "per_speaker.json", [r.to_json() for r in rows])
        (out / "per_speaker.txt").write_text(speaker_report_text(rows) + "\n", encoding="utf-8")
        summary["detection"] = det.to_json()
    _json_out(out / "summary.json", summary)
    _snapshot_config(args, out)
    print(f"global accuracy {cls_report.global_accuracy:.4f} -> {out}")
    return 0


# ------------------------------------------------------------------ sweep

def cmd_sweep(args) -> int:
    _require_inputs(args.checkpoint, args.samples, args.truth, args.ratings)
    from .evaluation import threshold_sweep
    out = _prepare_out_dir(args)
    _, _, records = _score_samples(Path(args.checkpoint), Path(args.samples),
                                   args.expected, args.competing, k=0.0)
    records = _attach_expert_labels(records, args)
    if not records:
        return _fail("no scored instances matched the expert label source")
    if args.k_steps < 2:
        return _fail("--k-steps must be at least 2")
    step = (args.k_max - args.k_min) / (args.k_steps - 1)
    grid = [args.k_min + i * step for i in range(args.k_steps)]
    sweep = threshold_sweep(records, grid)
    sweep.to_csv(out / "sweep.csv")
    _snapshot_config(args, out)
    print(f"swept {len(grid)} thresholds over {len(records)} records -> {out / 'sweep.csv'}")
    return 0


# -------------------------------------------------------------- agreement

def cmd_agreement(args) -> int:
    _require_inputs(args.ratings)
    from .agreement import (RatingsTable, grid_to_json, krippendorff_alpha,
                            pairwise_kappa_grid)
    from .errors import DegenerateDataError

    out = _prepare_out_dir(args)
    table = RatingsTable.from_csv(Path(args.ratings))
    _, _, matrix = table.matrix()
    # conventional pairing of score types with difference functions:
    # primary -> ordinal, combined -> interval, binary -> nominal
    score_type = args.score_type or {
        "ordinal": "primary", "interval": "combined", "nominal": "binary"}[args.scale]
    report = {"scale": args.scale, "score_type": score_type, "n_annotators": len(matrix)}
    try:
        result = krippendorff_alpha(matrix, args.scale)
        report["alpha"] = {"value": result.statistic, "n_items": result.n_items,
                           "band": result.band}
    except (DegenerateDataError, ValueError) as exc:
        # single-annotator exports have no multiply-rated items; the kappa
        # grid (intra-annotator diagonal) is still worth reporting
        report["alpha"] = {"value": None, "error": str(exc)}
    grid = pairwise_kappa_grid(table.first_ratings(), table.duplicate_pairs())
    report["kappa_grid"] = grid_to_json(grid)
    _json_out(out / "agreement.json", report)
    _snapshot_config(args, out)
    alpha = report["alpha"].get("value")
    print(f"alpha={alpha if alpha is not None else 'undefined'} -> {out / 'agreement.json'}")
    return 0


# ------------------------------------------------------------------ serve

def cmd_serve(args) -> int:
    _require_inputs(args.config)
    import uvicorn
    from .service import create_app, parse_config_file
    config = parse_config_file(Path(args.config))
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artikit",
                                     description="articulation error detection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--speakers", type=int, default=4)
    p.add_argument("--utterances", type=int, default=8)
    p.add_argument("--phones", type=int, default=9)
    p.add_argument("--fps", type=float, default=120.0)
    p.add_argument("--scanlines", type=int, default=63)
    p.add_argument("--echoes", type=int, default=96)
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--error-map", action="append", metavar="LABELED:RENDERED",
                   help="substitution pair, e.g. velar:alveolar (repeatable)")
    p.add_argument("--session", default="td")
    p.add_argument("--speaker-prefix", default="spk")
    p.add_argument("--first-frame-time", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_out_args(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prepare", help="build balanced sample sets from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--train-speakers", help="comma-separated speaker ids")
    p.add_argument("--val-speakers")
    p.add_argument("--test-speakers")
    p.add_argument("--cap", type=int, default=1000, help="per-class training sample cap")
    p.add_argument("--mfcc-cache", help="directory for the optional MFCC cache")
    p.add_argument("--seed", type=int, default=0)
    _add_out_args(p)
    p.set_defaults(func=cmd_prepare)

    def add_train_args(p, with_mode: bool):
        p.add_argument("--train", required=True, help="training .samples file")
        p.add_argument("--val", required=True, help="validation .samples file")
        if with_mode:
            p.add_argument("--mode", choices=["scratch", "pooled"], default="scratch")
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--minibatch", type=int, default=128)
        p.add_argument("--l2", type=float, default=0.1)
        p.add_argument("--conv1-filters", type=int, default=32)
        p.add_argument("--conv2-filters", type=int, default=64)
        p.add_argument("--audio-fc-width", type=int, default=256)
        p.add_argument("--hidden-width", type=int, default=512)
        p.add_argument("--seed", type=int, default=0)
        _add_out_args(p)

    p = sub.add_parser("train", help="train from scratch or on pooled data")
    add_train_args(p, with_mode=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("finetune", help="fine-tune from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    add_train_args(p, with_mode=False)
    p.set_defaults(func=cmd_finetune)

    def add_score_args(p):
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--samples", required=True)
        p.add_argument("--expected", choices=CLASSES, default="velar")
        p.add_argument("--competing", choices=CLASSES, default=None)

    p = sub.add_parser("score", help="emit model scores for a sample set")
    add_score_args(p)
    p.add_argument("--k", type=float, default=0.0)
    _add_out_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="classification + detection reports")
    add_score_args(p)
    p.add_argument("--k", type=float, default=0.0)
    _add_expert_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="threshold sweep for detection metrics")
    add_score_args(p)
    p.add_argument("--k-min", type=float, default=-2.0)
    p.add_argument("--k-max", type=float, default=2.0)
    p.add_argument("--k-steps", type=int, default=41)
    _add_expert_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("agreement", help="reliability statistics from a ratings CSV")
    p.add_argument("--ratings", required=True)
    p.add_argument("--scale", choices=["nominal", "ordinal", "interval"], default="nominal")
    p.add_argument("--score-type", help="label for the score type the CSV holds "
                                        "(default inferred from --scale)")
    _add_out_args(p)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--config", required=True, help="key=value config file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    from .nnet.layers import tune_malloc
    tune_malloc()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except ArtikitError as exc:
        return _fail(str(exc))
    except FileNotFoundError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
