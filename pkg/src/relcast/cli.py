"""Command-line surface: train, predict, eval, synth, gradcheck, census.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 numeric
failure (gradcheck above tolerance).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from relcast import corpus_io, model_io
from relcast.decode import DecodeConfig, decode, infer_ungrounded
from relcast.graph import (
    AssignmentError,
    FlatModel,
    GraphValidationError,
    gold_labels,
    triad_census,
)
from relcast.logreg import LRModel, predict_lr_batch, train_lr
from relcast.metrics import evaluate, format_metrics
from relcast.mixture import (
    ClusteredModel,
    MixtureTrainConfig,
    gating_gradients,
    frozen_objective,
    predict_cluster,
    train_mixture,
)
from relcast.perceptron import TrainConfig, train_spr
from relcast.synth import ClusterProfile, SynthSpec, generate_corpus

USAGE_ERROR, DATA_ERROR, NUMERIC_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _decode_config(args) -> DecodeConfig:
    return DecodeConfig(
        component_cap=args.component_cap,
        confidence_threshold=args.tau,
        greedy_restarts=args.restarts,
        seed=args.seed,
    )


def _add_decode_flags(parser):
    parser.add_argument("--component-cap", type=int, default=20,
                        help="max edges per component for exhaustive decoding")
    parser.add_argument("--tau", type=float, default=0.5,
                        help="text-score confidence threshold for greedy restarts")
    parser.add_argument("--restarts", type=int, default=5,
                        help="greedy restarts for oversized components")


def _build_parser() -> _Parser:
    parser = _Parser(prog="relcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model on a gold-labelled corpus")
    train.add_argument("--model", choices=("lr", "spr", "mixture"), required=True)
    train.add_argument("--corpus", required=True)
    train.add_argument("--out", required=True, help="model file to write")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=10)
    train.add_argument("--eta", type=float, default=1.0)
    train.add_argument("--no-average", action="store_true")
    train.add_argument("--sampling", choices=("with_replacement", "shuffled_epochs"),
                       default="with_replacement")
    _add_decode_flags(train)
    train.add_argument("--clusters", type=int, default=2, help="mixture: cluster count")
    train.add_argument("--alpha", type=float, default=0.8, help="mixture: sharing weight")
    train.add_argument("--mu", type=float, default=0.01, help="mixture: gating step size")
    train.add_argument("--rounds", type=int, default=10, help="mixture: outer rounds")
    train.add_argument("--lambda-iters", type=int, default=50)
    train.add_argument("--lambda-init-scale", type=float, default=0.01)
    train.add_argument("--log", help="mixture: write the (round, phase, J) training log here")
    train.add_argument("--l2", type=float, default=1e-3, help="lr: regularization strength")
    train.add_argument("--lr-iters", type=int, default=1000)
    train.add_argument("--lr-tol", type=float, default=1e-6)

    predict = sub.add_parser("predict", help="label a corpus with a trained model")
    predict.add_argument("--model-file", required=True)
    predict.add_argument("--corpus", required=True)
    predict.add_argument("--out", required=True, help="predictions JSONL to write")
    predict.add_argument("--seed", type=int, default=0)
    predict.add_argument("--infer-ungrounded", action="store_true",
                         help="also predict unannotated pairs that close triangles "
                              "(structured models only)")
    _add_decode_flags(predict)

    evalp = sub.add_parser("eval", help="evaluate a model against gold labels")
    evalp.add_argument("--model-file", required=True)
    evalp.add_argument("--corpus", required=True)
    evalp.add_argument("--seed", type=int, default=0)
    evalp.add_argument("--json-out", help="also write the metrics record to this file")
    _add_decode_flags(evalp)

    synth = sub.add_parser("synth", help="generate a synthetic corpus")
    synth.add_argument("--out", required=True)
    synth.add_argument("--docs", type=int, default=50)
    synth.add_argument("--chars", type=int, nargs=2, default=(4, 7), metavar=("LO", "HI"))
    synth.add_argument("--density", type=float, default=0.5)
    synth.add_argument("--struct-weights", type=float, nargs=4, default=(0.0, 0.0, 0.0, 0.0),
                       metavar=("CLIQUE", "LOVE", "ENEMY", "STANDOFF"))
    synth.add_argument("--dim", type=int, default=6)
    synth.add_argument("--signal", type=float, default=1.0)
    synth.add_argument("--noise", type=float, default=1.0)
    synth.add_argument("--sweeps", type=int, default=200)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--profiles", help="JSON list of {struct_weights, descriptor_mean} "
                                          "cluster profiles")

    gradcheck = sub.add_parser("gradcheck", help="finite-difference check of gating gradients")
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--trials", type=int, default=20)
    gradcheck.add_argument("--tol", type=float, default=1e-5)

    census = sub.add_parser("census", help="triad census of a corpus's gold labels")
    census.add_argument("--corpus", required=True)
    return parser


def _cmd_train(args) -> int:
    corpus = corpus_io.parse_corpus(args.corpus)
    pairs = corpus.training_pairs()
    if args.model == "lr":
        X = np.vstack([e.features for doc in corpus.documents for e in doc.edges])
        y = np.array([e.gold for doc in corpus.documents for e in doc.edges])
        model = train_lr(X, y, l2=args.l2, max_iters=args.lr_iters, tol=args.lr_tol)
    elif args.model == "spr":
        cfg = TrainConfig(
            num_epochs=args.epochs, eta=args.eta, seed=args.seed,
            sampling=args.sampling, averaging=not args.no_average,
            decode=_decode_config(args),
        )
        model = train_spr(pairs, cfg, corpus.feature_names)
    else:
        inner = TrainConfig(
            num_epochs=args.epochs, eta=args.eta, seed=args.seed,
            sampling=args.sampling, averaging=not args.no_average,
            decode=_decode_config(args),
        )
        cfg = MixtureTrainConfig(
            n_clusters=args.clusters, alpha=args.alpha, mu=args.mu,
            outer_rounds=args.rounds, lambda_iters=args.lambda_iters,
            lambda_init_scale=args.lambda_init_scale, seed=args.seed, inner=inner,
        )
        log = [] if args.log else None
        model = train_mixture(pairs, cfg, corpus.feature_names, log=log)
        if args.log:
            with open(args.log, "w", encoding="utf-8") as handle:
                for record in log:
                    handle.write(json.dumps(record, sort_keys=True) + "\n")
    model_io.save_model(model, args.out)
    print(f"trained {args.model} model on {len(corpus.documents)} documents -> {args.out}")
    return 0


def _predict_document(model, doc, cfg, want_ungrounded):
    record = {"id": doc.id, "edges": []}
    if isinstance(model, LRModel):
        if doc.edges:
            labels, probs = predict_lr_batch(model, doc.feature_matrix)
        else:
            labels, probs = np.zeros(0, dtype=np.int64), np.zeros(0)
        for e, edge in enumerate(doc.edges):
            record["edges"].append(
                {"a": edge.a, "b": edge.b, "label": int(labels[e]), "prob": float(probs[e])}
            )
        return record, labels

    if isinstance(model, ClusteredModel):
        k = predict_cluster(model, doc)
        flat = model.flat_model(k)
        record["cluster"] = k
    else:
        flat = model
    labels, total = decode(flat, doc, cfg)
    record["score"] = total
    for e, edge in enumerate(doc.edges):
        record["edges"].append({"a": edge.a, "b": edge.b, "label": int(labels[e])})
    if want_ungrounded:
        record["inferred"] = [
            {"a": a, "b": b, "label": label}
            for (a, b), label in infer_ungrounded(flat, doc, labels, cfg)
        ]
    return record, labels


def _cmd_predict(args) -> int:
    model = model_io.load_model(args.model_file)
    corpus = corpus_io.parse_corpus(args.corpus)
    cfg = _decode_config(args)
    if args.infer_ungrounded and isinstance(model, LRModel):
        print("note: --infer-ungrounded is ignored for lr models", file=sys.stderr)
    want = args.infer_ungrounded and not isinstance(model, LRModel)
    with open(args.out, "w", encoding="utf-8") as handle:
        for doc in corpus.documents:
            record, _ = _predict_document(model, doc, cfg, want)
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"predicted {len(corpus.documents)} documents -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = model_io.load_model(args.model_file)
    corpus = corpus_io.parse_corpus(args.corpus)
    cfg = _decode_config(args)
    predictions, gold = [], []
    for doc in corpus.documents:
        _, labels = _predict_document(model, doc, cfg, False)
        predictions.extend(int(v) for v in labels)
        gold.extend(int(v) for v in gold_labels(doc))
    metrics = evaluate(predictions, gold)
    print(format_metrics(metrics))
    record = json.dumps(metrics.to_dict(), sort_keys=True)
    print(record)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as handle:
            handle.write(record + "\n")
    return 0


def _cmd_synth(args) -> int:
    profiles = None
    if args.profiles:
        try:
            raw = json.loads(args.profiles)
            profiles = tuple(
                ClusterProfile(tuple(p["struct_weights"]), tuple(p["descriptor_mean"]))
                for p in raw
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorpusArgumentError(f"bad --profiles value: {exc}")
    spec = SynthSpec(
        num_docs=args.docs, chars_range=tuple(args.chars), edge_density=args.density,
        struct_weights=tuple(args.struct_weights), text_dim=args.dim,
        text_signal=args.signal, text_noise=args.noise,
        cluster_profiles=profiles, gibbs_sweeps=args.sweeps, seed=args.seed,
    )
    corpus = generate_corpus(spec)
    corpus_io.write_corpus([doc for doc, _ in corpus], args.out)
    n_edges = sum(len(doc.edges) for doc, _ in corpus)
    print(f"generated {len(corpus)} documents ({n_edges} edges) -> {args.out}")
    return 0


def _cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for trial in range(args.trials):
        K = int(rng.integers(2, 4))
        p = int(rng.integers(2, 6))
        m = int(rng.integers(5, 12))
        gating = rng.normal(scale=0.5, size=(K, p))
        descriptors = rng.normal(size=(m, p))
        losses = rng.uniform(0.0, 5.0, size=(m, K))

        grads = gating_gradients(gating, descriptors, losses)
        step = 1e-5
        fd = np.zeros_like(grads)
        for k in range(K):
            for j in range(p):
                bump = np.zeros_like(gating)
                bump[k, j] = step
                fd[k, j] = (
                    frozen_objective(gating + bump, descriptors, losses)
                    - frozen_objective(gating - bump, descriptors, losses)
                ) / (2 * step)
        err = np.linalg.norm(grads - fd) / max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, float(err))
    print(f"gradcheck: {args.trials} trials, max relative error {worst:.3e} "
          f"(tolerance {args.tol:.1e})")
    if worst > args.tol:
        print("gradcheck FAILED", file=sys.stderr)
        return NUMERIC_ERROR
    return 0


def _cmd_census(args) -> int:
    corpus = corpus_io.parse_corpus(args.corpus)
    totals = np.zeros(4, dtype=np.int64)
    print("document  clique  love_triangle  common_enemy  mexican_standoff")
    for doc in corpus.documents:
        census = triad_census(doc, gold_labels(doc))
        counts = census.as_array().astype(np.int64)
        totals += counts
        print(f"{doc.id}  {counts[0]}  {counts[1]}  {counts[2]}  {counts[3]}")
    print(f"TOTAL  {totals[0]}  {totals[1]}  {totals[2]}  {totals[3]}")
    return 0


class CorpusArgumentError(ValueError):
    """A structured flag value (like --profiles) failed to parse."""


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "synth": _cmd_synth,
    "gradcheck": _cmd_gradcheck,
    "census": _cmd_census,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CorpusArgumentError as exc:
        print(f"relcast: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (corpus_io.CorpusFormatError, model_io.ModelFormatError,
            GraphValidationError, AssignmentError) as exc:
        print(f"relcast: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"relcast: data error: {exc}", file=sys.stderr)
        return DATA_ERROR


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
