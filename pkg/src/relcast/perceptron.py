"""Structured perceptron training with averaged weights.

Each update attempt draws a training document, decodes the best labelling
under the current weights and, when that labelling scores at least as high
as the gold one without being identical to it, steps the weights toward the
gold joint features.  Restricting updates to such violations keeps training
sound even when an oversized component was decoded greedily.  The averaged
variant returns the mean weight vector over all attempts, which is the
usual deterministic stand-in for vote counting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from relcast.decode import DecodeConfig, decode
from relcast.graph import Document, Edge, FlatModel, joint_features, score, validate_labels

#: Documents below this instance weight are dropped from the sampling pool.
WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for perceptron training."""

    num_epochs: int = 10
    eta: float = 1.0
    seed: int = 0
    sampling: str = "with_replacement"  # or "shuffled_epochs"
    averaging: bool = True
    decode: DecodeConfig = field(default_factory=DecodeConfig)

    def __post_init__(self):
        if self.num_epochs < 1:
            raise ValueError("num_epochs must be >= 1")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.sampling not in ("with_replacement", "shuffled_epochs"):
            raise ValueError(f"unknown sampling mode {self.sampling!r}")


def hinge_loss(model: FlatModel, doc: Document, gold, cfg: DecodeConfig | None = None) -> float:
    """Score gap between the best labelling and the gold one.

    The maximization includes gold itself, so the result is never negative
    even when greedy decoding undershoots the true maximum.
    """
    _, best = decode(model, doc, cfg)
    gold_score = score(model, doc, gold)
    return max(best, gold_score) - gold_score


def standardization_stats(docs, floor: float = 1e-8):
    """Pooled per-feature mean and stddev over every edge in the corpus."""
    mats = [d.feature_matrix for d in docs if d.edges]
    if not mats:
        return np.zeros(0), np.ones(0)
    stacked = np.vstack(mats)
    return stacked.mean(axis=0), np.maximum(stacked.std(axis=0), floor)


def standardize_documents(docs, mean, std):
    """Copies of the documents with z-scored edge features."""
    out = []
    for doc in docs:
        if not doc.edges:
            out.append(doc)
            continue
        z = (doc.feature_matrix - mean) / std
        edges = tuple(
            Edge(e.a, e.b, z[i], e.gold) for i, e in enumerate(doc.edges)
        )
        out.append(Document(doc.id, doc.characters, edges, doc.descriptor))
    return out


def _run_epochs(
    docs, golds, instance_weights, cfg, rng, featurize, model_of, w, w_sum, steps,
    update_log=None,
):
    """Core perceptron loop, shared by flat and cluster-augmented training.

    `featurize(i, labels)` maps a labelling of document i into the weight
    space of `w`, and `model_of(w, i)` yields the decoding model for that
    document.  `w` and `w_sum` are mutated in place; the running-average
    step count is returned so several runs can share one trajectory.
    """
    m = len(docs)
    phi_gold = [featurize(i, golds[i]) for i in range(m)]
    mistakes_per_epoch = []
    for _ in range(cfg.num_epochs):
        if cfg.sampling == "shuffled_epochs":
            order = rng.permutation(m)
        else:
            order = rng.integers(0, m, size=m)
        mistakes = 0
        for i in order:
            i = int(i)
            predicted, _ = decode(model_of(w, i), docs[i], cfg.decode)
            if not np.array_equal(predicted, golds[i]):
                mistakes += 1
                phi_hat = featurize(i, predicted)
                if w @ phi_hat >= w @ phi_gold[i]:  # update on violations only
                    delta = (cfg.eta * instance_weights[i]) * (phi_gold[i] - phi_hat)
                    w += delta
                    if update_log is not None:
                        update_log.append((i, delta))
            steps += 1
            w_sum += w
        mistakes_per_epoch.append(mistakes)
    return steps, mistakes_per_epoch


def train_weighted(
    corpus,
    instance_weights,
    cfg: TrainConfig | None = None,
    feature_names=None,
    standardization=None,
    update_log=None,
) -> FlatModel:
    """Perceptron training with a per-document weight on every update step.

    Documents weighing less than 1e-6 are dropped from the sampling pool
    entirely, so training with weights (1, 0) matches training on the first
    document alone.  Standardization statistics default to the pooled stats
    of the retained documents and are baked into the returned model.
    """
    cfg = cfg or TrainConfig()
    if not corpus:
        raise ValueError("empty corpus")
    weights = np.asarray(instance_weights, dtype=np.float64)
    if weights.shape != (len(corpus),):
        raise ValueError("one instance weight per document required")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValueError("instance weights must be finite and >= 0")

    pool = [i for i in range(len(corpus)) if weights[i] >= WEIGHT_FLOOR]
    docs = [corpus[i][0] for i in pool]
    golds = [validate_labels(corpus[i][0], corpus[i][1]) for i in pool]

    if standardization is None:
        mean, std = standardization_stats(docs if docs else [c[0] for c in corpus])
    else:
        mean, std = standardization
    d = mean.size
    names = tuple(feature_names) if feature_names else tuple(f"f{i}" for i in range(d))

    docs_std = standardize_documents(docs, mean, std)
    w = np.zeros(d + 4)
    w_sum = np.zeros(d + 4)
    rng = np.random.default_rng(cfg.seed)

    def featurize(i, labels):
        return joint_features(docs_std[i], labels, text_dim=d)

    def model_of(weights_now, _i):
        return FlatModel(weights_now[:d], weights_now[d:], names)

    steps = 0
    mistakes_per_epoch = []
    if docs_std:
        steps, mistakes_per_epoch = _run_epochs(
            docs_std, golds, weights[pool], cfg, rng, featurize, model_of,
            w, w_sum, steps, update_log,
        )

    final = w_sum / steps if (cfg.averaging and steps) else w
    meta = {
        "kind": "spr",
        "num_epochs": cfg.num_epochs,
        "eta": cfg.eta,
        "seed": cfg.seed,
        "sampling": cfg.sampling,
        "averaged": cfg.averaging,
        "mistakes_per_epoch": mistakes_per_epoch,
    }
    return FlatModel(final[:d], final[d:], names, mean, std, meta)


def train_spr(
    corpus, cfg: TrainConfig | None = None, feature_names=None, update_log=None
) -> FlatModel:
    """Train the flat structured model on (document, gold labelling) pairs."""
    return train_weighted(
        corpus, np.ones(len(corpus)), cfg, feature_names, update_log=update_log
    )
