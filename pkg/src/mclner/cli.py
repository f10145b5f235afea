"""Command-line interface: train, tag, eval, neighbors, synth, ablate.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .ablation import DEFAULT_VARIANTS, format_table, run_ablation
from .archive import ArchiveError, load_model
from .corpus import CorpusError, Sentence, read_corpus, write_corpus
from .evaluator import evaluate, format_report, nearest_neighbors
from .synth import SynthConfig, corpus_stats, generate
from .tagger import NeuralTagger


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", choices=("plain", "tensor"), default="plain",
                   help="network architecture")
    p.add_argument("--use-root", action="store_true",
                   help="add the current root embedding to the input")
    p.add_argument("--use-tag-emb", action="store_true",
                   help="feed the previous tag as an embedding instead of "
                        "a transition matrix")
    p.add_argument("--use-features", action="store_true",
                   help="append raw feature bits for every window slot")
    p.add_argument("--window", type=int, default=3, help="context window size")
    p.add_argument("--dim", type=int, default=50,
                   help="word/root/tag embedding size")
    p.add_argument("--hidden", type=int, default=300,
                   help="hidden units for the plain architecture")
    p.add_argument("--tensor-size", type=int, default=50,
                   help="bilinear units for the tensor architecture")
    p.add_argument("--factors", type=int, default=3,
                   help="rank of the factorized tensor slices")
    p.add_argument("--lr", type=float, default=0.01, help="AdaGrad learning rate")
    p.add_argument("--l2", type=float, default=1e-4, help="L2 strength")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)


def _estimator(args, seed=None) -> NeuralTagger:
    return NeuralTagger(
        architecture=args.arch, window=args.window, dim=args.dim,
        hidden_size=args.hidden, tensor_size=args.tensor_size,
        factors=args.factors, use_root=args.use_root,
        use_tag_embedding=args.use_tag_emb, use_features=args.use_features,
        learning_rate=args.lr, l2=args.l2, epochs=args.epochs,
        seed=args.seed if seed is None else seed,
        pretrained_words=getattr(args, "pretrained_words", None),
        pretrained_roots=getattr(args, "pretrained_roots", None))


def cmd_train(args) -> int:
    train_sents = read_corpus(args.train, schema=args.schema)
    dev_sents = read_corpus(args.dev, schema=args.schema)
    log_lines: list[str] = []

    def log(line: str) -> None:
        print(line)
        log_lines.append(line)

    est = _estimator(args)
    est.fit(train_sents, dev=dev_sents, log_fn=log)
    est.save(args.out)
    if args.log is not None:
        with open(args.log, "w", encoding="utf-8") as handle:
            handle.write("\n".join(log_lines) + "\n")
    print(f"saved model to {args.out} "
          f"(best epoch {est.best_epoch_}, dev F1 {est.best_dev_f1_:.2f})")
    return 0


def cmd_tag(args) -> int:
    model, _ = load_model(args.model)
    sentences = read_corpus(args.input, schema=args.schema)
    out = sys.stdout if args.output is None else \
        open(args.output, "w", encoding="utf-8")
    try:
        blocks = []
        for sentence in sentences:
            predicted = model.predict_tags(sentence)
            lines = []
            for token, tag in zip(sentence, predicted):
                parts = [token.surface, token.root,
                         "".join(str(b) for b in token.morph_bits)]
                if token.gold_tag is not None:
                    parts.append(token.gold_tag)
                parts.append(tag)
                lines.append(" ".join(parts))
            blocks.append("\n".join(lines))
        if blocks:
            out.write("\n\n".join(blocks) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _check_aligned(gold: list[Sentence], pred: list[Sentence]) -> None:
    if len(gold) != len(pred):
        raise CorpusError(f"gold has {len(gold)} sentences, "
                          f"predictions have {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise CorpusError(f"sentence {i}: gold has {len(g)} tokens, "
                              f"predictions have {len(p)}")
        for j, (gt, pt) in enumerate(zip(g, p)):
            if gt.surface != pt.surface:
                raise CorpusError(f"sentence {i}, token {j}: gold surface "
                                  f"{gt.surface!r} != predicted {pt.surface!r}")


def cmd_eval(args) -> int:
    gold = read_corpus(args.gold, schema=args.gold_schema)
    pred = read_corpus(args.pred, schema=args.pred_schema)
    _check_aligned(gold, pred)
    report = evaluate(gold, [p.tags() for p in pred])
    print(format_report(report, machine=args.machine))
    return 0


def cmd_neighbors(args) -> int:
    model, _ = load_model(args.model)
    if args.table == "word":
        table, index = model.word_table, model.vocab.word_index
        query = args.query.lower() if model.vocab.lowercase else args.query
    else:
        if model.root_table is None:
            raise CorpusError("this model has no root embeddings")
        table, index = model.root_table, model.vocab.root_index
        query = args.query
    if query not in index:
        print(f"error: {args.query!r} is not in the model vocabulary",
              file=sys.stderr)
        return 2
    for token, cosine in nearest_neighbors(table, index, query, args.k):
        print(f"{token}\t{cosine:.4f}")
    return 0


def _synth_config(args) -> SynthConfig:
    return SynthConfig(
        n_roots=args.n_roots, n_suffixes=args.n_suffixes,
        max_suffix_chain=args.max_suffix_chain, n_loc=args.n_loc,
        n_org=args.n_org, n_per=args.n_per, n_sentences=args.n_sentences,
        min_length=args.min_length, max_length=args.max_length,
        entity_density=args.density, seed=args.seed)


def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-roots", type=int, default=120)
    p.add_argument("--n-suffixes", type=int, default=12)
    p.add_argument("--max-suffix-chain", type=int, default=2)
    p.add_argument("--n-loc", type=int, default=20)
    p.add_argument("--n-org", type=int, default=15)
    p.add_argument("--n-per", type=int, default=20)
    p.add_argument("--n-sentences", type=int, default=1000)
    p.add_argument("--min-length", type=int, default=5)
    p.add_argument("--max-length", type=int, default=12)
    p.add_argument("--density", type=float, default=0.15,
                   help="per-slot probability of starting an entity")


def cmd_synth(args) -> int:
    corpus = generate(_synth_config(args))
    os.makedirs(args.out_dir, exist_ok=True)
    for name, split in (("train", corpus.train), ("dev", corpus.dev),
                        ("test", corpus.test)):
        path = os.path.join(args.out_dir, f"{name}.txt")
        write_corpus(split, path)
        print(f"{name}: {corpus_stats(split).summary()}")
    print(f"total: {corpus.stats.summary()}")
    return 0


def cmd_ablate(args) -> int:
    corpus = generate(_synth_config(args))
    print(f"corpus: {corpus.stats.summary()}")
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    seeds = [int(s) for s in args.seeds.split(",")]
    base = {"window": args.window, "dim": args.dim, "hidden_size": args.hidden,
            "tensor_size": args.tensor_size, "factors": args.factors,
            "learning_rate": args.lr, "l2": args.l2, "epochs": args.epochs}
    rows = run_ablation(corpus.train, corpus.dev, corpus.test,
                        variants=variants, seeds=seeds, base_params=base,
                        log_fn=print if args.verbose else None)
    print(format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mclner",
        description="window-based neural named-entity tagger for "
                    "morphologically rich languages")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and save an archive")
    p.add_argument("--train", required=True, help="training corpus path")
    p.add_argument("--dev", required=True, help="development corpus path")
    p.add_argument("--schema", default="auto",
                   help="corpus column layout, e.g. surface,root,morph,tag")
    p.add_argument("--pretrained-words", default=None,
                   help="word2vec text file for word embeddings")
    p.add_argument("--pretrained-roots", default=None,
                   help="word2vec text file for root embeddings")
    _add_model_flags(p)
    p.add_argument("--out", required=True, help="model archive output path")
    p.add_argument("--log", default=None, help="also write the epoch log here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--schema", default="auto")
    p.add_argument("--output", default=None, help="default: stdout")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="score predictions against gold tags")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold-schema", default="auto")
    p.add_argument("--pred-schema", default="auto")
    p.add_argument("--machine", action="store_true",
                   help="tab-separated report instead of the text layout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("neighbors", help="nearest embedding neighbors")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--table", choices=("word", "root"), default="word")
    p.set_defaults(func=cmd_neighbors)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_synth_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="train variants on synthetic splits")
    _add_synth_flags(p)
    p.add_argument("--variants", default=",".join(DEFAULT_VARIANTS))
    p.add_argument("--seeds", default="0")
    p.add_argument("--verbose", action="store_true")
    _add_model_flags(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except (CorpusError, ArchiveError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())
