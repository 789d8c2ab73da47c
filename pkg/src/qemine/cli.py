"""Command-line entry point wiring the pipelines together.

Every command that writes an output file also writes a JSON run
manifest next to it (``<out>.manifest.json``) recording the command,
resolved options, seed, paths, tool version and wall-clock duration.
Exit codes: 0 success, 1 usage error, 2 data or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .augment import AugmentConfig, augment_filtration, augment_scorer
from .corpus import (
    load_bucc,
    load_nli,
    load_parallel,
    load_qe,
    load_sts,
    load_tatoeba,
    save_qe,
    save_bucc,
    save_parallel,
    save_tatoeba,
)
from .errors import ConfigError, QemineError
from .estimators import ContrastiveFilter, FeatureStackScorer, MultitaskScorer
from .mining import (
    MiningConfig,
    f1_score,
    mine_bucc,
    mine_tatoeba,
    score_matrix,
    tatoeba_accuracy,
)
from .model import load_model, save_model
from .stats import histogram_csv, pearson, score_histogram, t_tail, williams_test
from .synth import SynthConfig, generate_corpus
from .training import (
    GRAD_CHECK_KINDS,
    TrainConfig,
    align_encoders,
    feature_predict,
    grad_check,
    history_to_csv,
    load_feature_model,
    save_feature_model,
)

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def _write_manifest(out_path, command, args, seed, inputs, outputs, started):
    manifest = {
        "command": command,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "seed": seed,
        "inputs": [str(p) for p in inputs if p],
        "outputs": [str(p) for p in outputs if p],
        "version": __version__,
        "duration_s": round(time.monotonic() - started, 6),
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _tasks(spec: str) -> tuple:
    return tuple(t.strip().lower() for t in spec.split(",") if t.strip())


def _cmd_train(args, started):
    qe = load_qe(args.qe, normalize=args.normalize) if args.qe else None
    sts = load_sts(args.sts) if args.sts else None
    nli = load_nli(args.nli) if args.nli else None
    validation = load_qe(args.validation, normalize=args.normalize) if args.validation else None
    scorer = MultitaskScorer(
        tasks=_tasks(args.tasks),
        epochs=args.epochs,
        finetune_epochs=args.finetune_epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        n_features=args.features,
        hidden_units=args.hidden,
        embedding_dim=args.dim,
        until_convergence=args.until_convergence,
        seed=args.seed,
    )
    scorer.fit(qe, sts, nli, validation=validation)
    scorer.save(args.out)
    if args.history:
        with open(args.history, "w", encoding="utf-8") as handle:
            handle.write(history_to_csv(scorer.history_))
    _write_manifest(args.out, "train", args, args.seed,
                    [args.qe, args.sts, args.nli, args.validation],
                    [args.out, args.history], started)
    return 0


def _cmd_augment(args, started):
    records = load_qe(args.qe, normalize=args.normalize)
    config = AugmentConfig(args.n, args.cutoff, args.seed)
    if args.mode == "filter":
        dataset = augment_filtration(records, config)
    else:
        dataset = augment_scorer(records, config)
    save_qe(dataset.records(), args.out)
    print(
        f"{len(dataset.positives)} positives, {len(dataset.negatives)} negatives "
        f"({dataset.label_kind})",
        file=sys.stderr,
    )
    _write_manifest(args.out, "augment", args, args.seed, [args.qe], [args.out], started)
    return 0


def _cmd_train_filter(args, started):
    records = load_qe(args.data)
    positives = [r for r in records if r.score == 1.0]
    negatives = [r for r in records if r.score == 0.0]
    if not positives or not negatives:
        raise ConfigError("augmented file must contain pairs labeled exactly 1 and 0")
    encoder = ContrastiveFilter(
        margin=args.margin,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        n_features=args.features,
        hidden_units=args.hidden,
        embedding_dim=args.dim,
        seed=args.seed,
    )
    encoder.fit(positives, negatives)
    encoder.save(args.out)
    _write_manifest(args.out, "train-filter", args, args.seed, [args.data], [args.out], started)
    return 0


def _cmd_align(args, started):
    model, heads = load_model(args.model)
    parallel = load_parallel(args.parallel)
    config = TrainConfig(epochs=args.epochs, finetune_epochs=0,
                         batch_size=args.batch_size, learning_rate=args.lr, seed=args.seed)
    aligned, report = align_encoders(model, parallel, config, args.heldout_fraction)
    save_model(aligned, heads, args.out)
    print(
        f"held-out cosine {report.cosine_before:.4f} -> {report.cosine_after:.4f} "
        f"({report.heldout_size} pairs)",
        file=sys.stderr,
    )
    _write_manifest(args.out, "align", args, args.seed,
                    [args.model, args.parallel], [args.out], started)
    return 0


def _cmd_train_feature(args, started):
    sts_backbone, _ = load_model(args.sts_backbone)
    nli_backbone, _ = load_model(args.nli_backbone)
    qe_backbone, _ = load_model(args.qe_backbone)
    records = load_qe(args.qe, normalize=args.normalize)
    scorer = FeatureStackScorer(
        sts_backbone, nli_backbone, qe_backbone,
        hidden_units=args.hidden, epochs=args.epochs,
        batch_size=args.batch_size, learning_rate=args.lr, seed=args.seed,
    )
    scorer.fit(records)
    save_feature_model(scorer.model_, args.out)
    _write_manifest(args.out, "train-feature", args, args.seed,
                    [args.sts_backbone, args.nli_backbone, args.qe_backbone, args.qe],
                    [args.out], started)
    return 0


def _cmd_mine_tatoeba(args, started):
    data = load_tatoeba(args.side_a, args.side_b)
    scorer = MultitaskScorer.load(args.model)
    matrix = score_matrix(scorer, data.references, data.hypotheses)
    predicted = mine_tatoeba(matrix)
    with open(args.out, "w", encoding="utf-8") as handle:
        for row, col in predicted:
            handle.write(f"{row}\t{col}\t{matrix.values[row, col]!r}\n")
    accuracy = tatoeba_accuracy(predicted, data.size)
    print(f"{data.size} rows, accuracy {accuracy:.4f}", file=sys.stderr)
    _write_manifest(args.out, "mine-tatoeba", args, args.seed,
                    [args.side_a, args.side_b, args.model], [args.out], started)
    return 0


def _cmd_mine_bucc(args, started):
    if args.threshold == "auto" and not args.train_gold:
        print("error: the auto threshold cannot be resolved without --train-gold",
              file=sys.stderr)
        return USAGE_EXIT
    corpus = load_bucc(args.side_a, args.side_b, args.gold)
    filter_model = ContrastiveFilter.load(args.filter_model)
    scorer = MultitaskScorer.load(args.model)
    threshold = args.threshold if args.threshold == "auto" else float(args.threshold)
    train_gold = None
    if args.train_gold:
        with open(args.train_gold, encoding="utf-8") as handle:
            train_gold = {
                tuple(line.split("\t")) for line in handle.read().splitlines() if line
            }
    config = MiningConfig(top_n=args.topn, threshold=threshold)
    result = mine_bucc(corpus, filter_model, scorer, config, train_gold)
    with open(args.out, "w", encoding="utf-8") as handle:
        for id_a, id_b, score in result.pairs:
            handle.write(f"{id_a}\t{id_b}\t{score!r}\n")
    precision, recall, f1 = f1_score(result.pair_set(), corpus.gold)
    print(
        f"{result.n_candidates} candidates, {result.n_forward} forward, "
        f"{result.n_backward} backward, {len(result.pairs)} selected, "
        f"threshold={result.threshold!r}, F1={f1:.4f} (P={precision:.4f} R={recall:.4f})",
        file=sys.stderr,
    )
    _write_manifest(args.out, "mine-bucc", args, args.seed,
                    [args.side_a, args.side_b, args.gold, args.filter_model, args.model],
                    [args.out], started)
    return 0


def _cmd_eval_qe(args, started):
    records = load_qe(args.qe, normalize=args.normalize)
    try:
        scorer = MultitaskScorer.load(args.model)
        predictions = scorer.predict(records)
    except QemineError:
        stack = load_feature_model(args.model)
        predictions = feature_predict(stack, records)
    labels = np.array([r.score for r in records])
    correlation = pearson(predictions, labels)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            for record, score in zip(records, predictions):
                handle.write(f"{record.source}\t{record.target}\t{float(score)!r}\n")
        _write_manifest(args.out, "eval-qe", args, args.seed,
                        [args.qe, args.model], [args.out], started)
    print(f"pearson={correlation!r}")
    return 0


def _cmd_williams(args, started):
    result = williams_test(args.r12, args.r13, args.r23, args.n)
    print(f"t={result.t_statistic!r} df={result.degrees_of_freedom} p={result.p_value!r}")
    return 0


def _cmd_t_tail(args, started):
    print(f"p={t_tail(args.t, args.df)!r}")
    return 0


def _cmd_hist(args, started):
    records = load_qe(args.qe, normalize=args.normalize)
    counts = score_histogram([r.score for r in records], args.bins)
    csv = histogram_csv(counts)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(csv)
        _write_manifest(args.out, "hist", args, args.seed, [args.qe], [args.out], started)
    else:
        sys.stdout.write(csv)
    return 0


def _cmd_synth(args, started):
    config = SynthConfig(
        vocab_size=args.vocab,
        corruption_rate=args.corruption,
        seed=args.seed,
    )
    bundle = generate_corpus(config, args.count)
    prefix = args.out
    save_qe(bundle.qe, f"{prefix}.qe.tsv")
    save_parallel(bundle.parallel, f"{prefix}.parallel.tsv")
    save_tatoeba(bundle.tatoeba, f"{prefix}.tatoeba.src", f"{prefix}.tatoeba.tgt")
    save_bucc(bundle.bucc, f"{prefix}.bucc.a.tsv", f"{prefix}.bucc.b.tsv", f"{prefix}.bucc.gold.tsv")
    outputs = [
        f"{prefix}.qe.tsv", f"{prefix}.parallel.tsv",
        f"{prefix}.tatoeba.src", f"{prefix}.tatoeba.tgt",
        f"{prefix}.bucc.a.tsv", f"{prefix}.bucc.b.tsv", f"{prefix}.bucc.gold.tsv",
    ]
    _write_manifest(prefix, "synth", args, args.seed, [], outputs, started)
    return 0


def _cmd_gradcheck(args, started):
    kinds = GRAD_CHECK_KINDS if args.loss == "all" else (args.loss,)
    rows = ["block,max_rel_error"]
    worst = 0.0
    for kind in kinds:
        report = grad_check(kind, seed=args.seed, eps=args.eps)
        prefix = f"{kind}:" if len(kinds) > 1 else ""
        for block, err in sorted(report.errors.items()):
            rows.append(f"{prefix}{block},{err!r}")
        worst = max(worst, report.max_error)
    csv = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(csv)
        _write_manifest(args.out, "gradcheck", args, args.seed, [], [args.out], started)
    else:
        sys.stdout.write(csv)
    print(f"max relative error {worst:.2e}", file=sys.stderr)
    return 0


def _add_net_flags(parser):
    parser.add_argument("--features", type=int, default=32768, help="hash buckets (power of two)")
    parser.add_argument("--hidden", type=int, default=256, help="hidden layer width")
    parser.add_argument("--dim", type=int, default=128, help="embedding dimension")


def _add_opt_flags(parser):
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--lr", type=float, default=1e-3, help="learning rate")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qemine", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qemine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="multitask-train a quality scorer")
    p.add_argument("--qe", help="QE TSV path")
    p.add_argument("--sts", help="STS TSV path")
    p.add_argument("--nli", help="NLI TSV path")
    p.add_argument("--validation", help="QE TSV used for convergence checks")
    p.add_argument("--tasks", default="qe,sts,nli")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--finetune-epochs", type=int, default=1)
    p.add_argument("--until-convergence", action="store_true")
    p.add_argument("--normalize", action="store_true", help="min-max rescale QE scores")
    p.add_argument("--history", help="write per-epoch loss CSV here")
    p.add_argument("--out", required=True)
    _add_net_flags(p)
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("augment", help="add mismatched negative pairs")
    p.add_argument("--qe", required=True)
    p.add_argument("--mode", choices=("filter", "scorer"), required=True)
    p.add_argument("--n", type=int, default=3, help="negatives per source")
    p.add_argument("--cutoff", type=float, default=0.7, help="quality demotion cutoff")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("train-filter", help="train the contrastive filtration encoder")
    p.add_argument("--data", required=True, help="binary-labeled QE TSV from augment --mode filter")
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--out", required=True)
    _add_net_flags(p)
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_train_filter)

    p = sub.add_parser("align", help="pull source embeddings toward English targets")
    p.add_argument("--model", required=True)
    p.add_argument("--parallel", required=True, help="source<TAB>target TSV")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--heldout-fraction", type=float, default=0.1)
    p.add_argument("--out", required=True)
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("train-feature", help="train the frozen-backbone feature predictor")
    p.add_argument("--sts-backbone", required=True)
    p.add_argument("--nli-backbone", required=True)
    p.add_argument("--qe-backbone", required=True)
    p.add_argument("--qe", required=True)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    _add_opt_flags(p)
    p.set_defaults(func=_cmd_train_feature)

    p = sub.add_parser("mine-tatoeba", help="full-matrix similarity search")
    p.add_argument("--side-a", required=True)
    p.add_argument("--side-b", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mine_tatoeba)

    p = sub.add_parser("mine-bucc", help="two-stage candidate mining")
    p.add_argument("--side-a", required=True)
    p.add_argument("--side-b", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--filter-model", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--topn", type=int, default=10)
    p.add_argument("--threshold", default="auto", help="selection threshold or 'auto'")
    p.add_argument("--train-gold", help="gold pairs for auto threshold tuning")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mine_bucc)

    p = sub.add_parser("eval-qe", help="score a QE file and report Pearson")
    p.add_argument("--qe", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", help="write predictions TSV here")
    p.set_defaults(func=_cmd_eval_qe)

    p = sub.add_parser("williams", help="dependent-correlation significance test")
    p.add_argument("--r12", type=float, required=True)
    p.add_argument("--r13", type=float, required=True)
    p.add_argument("--r23", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_williams)

    p = sub.add_parser("t-tail", help="one-tailed Student-t tail probability")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--df", type=int, required=True)
    p.set_defaults(func=_cmd_t_tail)

    p = sub.add_parser("hist", help="histogram of QE scores")
    p.add_argument("--qe", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_hist)

    p = sub.add_parser("synth", help="generate a synthetic corpus bundle")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--vocab", type=int, default=200)
    p.add_argument("--corruption", type=float, default=0.3)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("gradcheck", help="finite-difference check of analytic gradients")
    p.add_argument("--loss", default="all", choices=("all",) + GRAD_CHECK_KINDS)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gradcheck)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=42)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        return USAGE_EXIT
    started = time.monotonic()
    try:
        return args.func(args, started)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return DATA_EXIT
    except (QemineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
