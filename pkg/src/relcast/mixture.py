"""Narrative-type mixtures: gated cluster models with a shared base block.

Documents are soft-assigned to K clusters by a softmax over their content
descriptors.  Each cluster owns a structured model, realized by augmenting
joint features into K+1 blocks: a shared block scaled by (1 - alpha) and
one cluster block scaled by alpha, so every cluster's effective weights
decompose into a common base plus a cluster-specific additive part.  Alpha
0 collapses all clusters onto the shared block (no clustering); alpha 1
removes sharing entirely.

Training alternates two half-steps: weighted perceptron passes per cluster
(instances weighted by their membership probability), then gradient descent
on the gating vectors against the membership-weighted sum of the frozen
per-cluster losses.  Gating steps are backtracked so that half-step never
increases the objective.  The objective is non-convex, so different seeds
can reach different solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from relcast.decode import DecodeConfig, decode
from relcast.graph import (
    Document,
    FlatModel,
    GraphValidationError,
    joint_features,
    score,
    validate_labels,
)
from relcast.perceptron import (
    WEIGHT_FLOOR,
    TrainConfig,
    _run_epochs,
    hinge_loss,
    standardization_stats,
    standardize_documents,
)

#: Halvings tried when backtracking a gating step before accepting a no-op.
MAX_BACKTRACKS = 20


@dataclass(frozen=True)
class MixtureTrainConfig:
    """Hyperparameters for the clustered model."""

    n_clusters: int = 2
    alpha: float = 0.8
    mu: float = 0.01
    outer_rounds: int = 10
    lambda_iters: int = 50
    lambda_init_scale: float = 0.01
    seed: int = 0
    inner: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.outer_rounds < 1 or self.lambda_iters < 0:
            raise ValueError("outer_rounds must be >= 1 and lambda_iters >= 0")


@dataclass(frozen=True, eq=False)
class ClusteredModel:
    """K cluster models plus softmax gating over document descriptors.

    `shared` and `cluster` store the raw augmented blocks; cluster k scores
    a document with (1 - alpha) * shared + alpha * cluster[k], so the
    effective weights are a shared base plus a cluster-specific part.
    """

    alpha: float
    gating: np.ndarray  # (K, p)
    shared: np.ndarray  # (d + 4,)
    cluster: np.ndarray  # (K, d + 4)
    feature_names: tuple[str, ...] = ()
    feature_means: np.ndarray | None = None
    feature_stds: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        gating = np.array(self.gating, dtype=np.float64)
        shared = np.array(self.shared, dtype=np.float64)
        cluster = np.array(self.cluster, dtype=np.float64)
        if gating.ndim != 2 or cluster.ndim != 2 or shared.ndim != 1:
            raise GraphValidationError("gating/cluster must be matrices, shared a vector")
        if cluster.shape[0] != gating.shape[0]:
            raise GraphValidationError("one gating vector per cluster required")
        if cluster.shape[1] != shared.size or shared.size < 4:
            raise GraphValidationError("cluster blocks must match the shared block")
        for arr in (gating, shared, cluster):
            arr.flags.writeable = False
        object.__setattr__(self, "gating", gating)
        object.__setattr__(self, "shared", shared)
        object.__setattr__(self, "cluster", cluster)

    @property
    def n_clusters(self) -> int:
        return self.cluster.shape[0]

    @property
    def dim(self) -> int:
        return self.shared.size - 4

    def effective_weights(self, k: int) -> np.ndarray:
        return (1.0 - self.alpha) * self.shared + self.alpha * self.cluster[k]

    @cached_property
    def flat_models(self) -> tuple[FlatModel, ...]:
        """Per-cluster flat models carrying the shared standardization."""
        out = []
        for k in range(self.n_clusters):
            eff = self.effective_weights(k)
            out.append(
                FlatModel(
                    eff[: self.dim], eff[self.dim:], self.feature_names,
                    self.feature_means, self.feature_stds,
                )
            )
        return tuple(out)

    def flat_model(self, k: int) -> FlatModel:
        return self.flat_models[k]


def membership(gating, descriptor) -> np.ndarray:
    """Softmax cluster membership probabilities for one descriptor."""
    logits = np.asarray(gating) @ np.asarray(descriptor, dtype=np.float64)
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def memberships(gating, descriptors) -> np.ndarray:
    """Row-wise softmax memberships for a stack of descriptors, shape (m, K)."""
    logits = np.asarray(descriptors, dtype=np.float64) @ np.asarray(gating).T
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    return shifted / shifted.sum(axis=1, keepdims=True)


def augment_features(phi, k: int, n_clusters: int, alpha: float) -> np.ndarray:
    """Block layout ((1-alpha)*phi, 0, ..., alpha*phi at slot k, ..., 0)."""
    if not 0 <= k < n_clusters:
        raise IndexError(f"cluster index {k} out of range for {n_clusters} clusters")
    phi = np.asarray(phi, dtype=np.float64)
    size = phi.size
    out = np.zeros((n_clusters + 1) * size)
    out[:size] = (1.0 - alpha) * phi
    out[(k + 1) * size:(k + 2) * size] = alpha * phi
    return out


def cluster_losses(model: ClusteredModel, corpus, cfg: DecodeConfig | None = None) -> np.ndarray:
    """Hinge loss of every document under every cluster's weights, shape (m, K)."""
    out = np.zeros((len(corpus), model.n_clusters))
    for k, flat in enumerate(model.flat_models):
        for i, (doc, gold) in enumerate(corpus):
            out[i, k] = hinge_loss(flat, doc, gold, cfg)
    return out


def expected_loss(model: ClusteredModel, doc, gold, cfg: DecodeConfig | None = None) -> float:
    """Membership-weighted hinge loss of one document."""
    probs = membership(model.gating, doc.descriptor)
    losses = [hinge_loss(flat, doc, gold, cfg) for flat in model.flat_models]
    return float(probs @ np.asarray(losses))


def objective(model: ClusteredModel, corpus, cfg: DecodeConfig | None = None) -> float:
    """Total expected loss over a corpus."""
    return float(sum(expected_loss(model, doc, gold, cfg) for doc, gold in corpus))


def frozen_objective(gating, descriptors, losses) -> float:
    """Expected-loss objective with the per-(document, cluster) losses held fixed."""
    return float((memberships(gating, descriptors) * np.asarray(losses)).sum())


def gating_gradients(gating, descriptors, losses) -> np.ndarray:
    """Gradient of the frozen-loss objective in every gating vector, shape (K, p).

    For each document, a cluster's gradient weight is its membership times
    the gap between its loss and the membership-weighted mean loss, so the
    rows always sum to zero (softmax translation invariance).
    """
    probs = memberships(gating, descriptors)
    losses = np.asarray(losses, dtype=np.float64)
    gaps = losses - (probs * losses).sum(axis=1, keepdims=True)
    return (probs * gaps).T @ np.asarray(descriptors, dtype=np.float64)


def gating_gradient(gating, descriptors, losses, k: int) -> np.ndarray:
    return gating_gradients(gating, descriptors, losses)[k]


def grad_gating(model: ClusteredModel, corpus, k: int, cfg: DecodeConfig | None = None):
    """Gradient in gating vector k with losses recomputed then frozen."""
    descriptors = np.vstack([doc.descriptor for doc, _ in corpus])
    return gating_gradient(model.gating, descriptors, cluster_losses(model, corpus, cfg), k)


def predict_cluster(model: ClusteredModel, doc: Document) -> int:
    """Most likely cluster of a document; ties go to the smallest index."""
    return int(np.argmax(membership(model.gating, doc.descriptor)))


def decode_clustered(model: ClusteredModel, doc: Document, cfg: DecodeConfig | None = None):
    """Hard-gated decoding: labels and score under the most likely cluster."""
    k = predict_cluster(model, doc)
    labels, total = decode(model.flat_model(k), doc, cfg)
    return labels, total, k


def _descend_gating(gating, descriptors, losses, cfg: MixtureTrainConfig):
    """Backtracked gradient descent on the gating vectors with frozen losses.

    Each step halves the step size (up to MAX_BACKTRACKS times) until the
    objective does not increase, accepting a no-op when even the smallest
    step fails, so the gating half-step is monotone by construction.
    """
    current = frozen_objective(gating, descriptors, losses)
    for _ in range(cfg.lambda_iters):
        grads = gating_gradients(gating, descriptors, losses)
        step = cfg.mu
        for _ in range(MAX_BACKTRACKS + 1):
            candidate = gating - step * grads
            value = frozen_objective(candidate, descriptors, losses)
            if value <= current:
                gating, current = candidate, value
                break
            step *= 0.5
    return gating, current


def train_mixture(
    corpus, cfg: MixtureTrainConfig | None = None, feature_names=None, log=None
) -> ClusteredModel:
    """Alternating training of cluster perceptrons and gating parameters.

    Every outer round first runs a weighted perceptron pass per cluster on
    block-augmented features (instances weighted by membership), continuing
    from the current raw weights, then updates the gating vectors by
    backtracked gradient descent against the frozen per-cluster losses.
    The returned weights are the running average over all perceptron
    attempts when the inner config enables averaging.  Appends one record
    per half-step to `log` when given: the perceptron record carries the
    fresh objective J, the gating record carries J and its starting value.
    """
    cfg = cfg or MixtureTrainConfig()
    if not corpus:
        raise ValueError("empty corpus")
    K, alpha = cfg.n_clusters, cfg.alpha
    m = len(corpus)
    docs = [doc for doc, _ in corpus]
    golds = [validate_labels(doc, gold) for doc, gold in corpus]

    p_dims = {doc.descriptor.size for doc in docs}
    if len(p_dims) > 1:
        raise GraphValidationError(f"inconsistent descriptor dimensions: {sorted(p_dims)}")
    descriptors = np.vstack([doc.descriptor for doc in docs]) if p_dims != {0} else np.zeros((m, 0))

    mean, std = standardization_stats(docs)
    d = mean.size
    D = d + 4
    names = tuple(feature_names) if feature_names else tuple(f"f{i}" for i in range(d))
    docs_std = standardize_documents(docs, mean, std)

    init_rng = np.random.default_rng(cfg.seed)
    gating = init_rng.uniform(-cfg.lambda_init_scale, cfg.lambda_init_scale,
                              size=(K, descriptors.shape[1]))

    w = np.zeros((K + 1) * D)
    w_sum = np.zeros((K + 1) * D)
    steps = 0

    def effective(weights_now, k):
        return (1.0 - alpha) * weights_now[:D] + alpha * weights_now[(k + 1) * D:(k + 2) * D]

    def frozen_losses():
        out = np.zeros((m, K))
        for k in range(K):
            eff = effective(w, k)
            flat = FlatModel(eff[:d], eff[d:], names)
            for i in range(m):
                out[i, k] = hinge_loss(flat, docs_std[i], golds[i], cfg.inner.decode)
        return out

    for r in range(cfg.outer_rounds):
        probs = memberships(gating, descriptors)
        for k in range(K):
            pool = [i for i in range(m) if probs[i, k] >= WEIGHT_FLOOR]
            if not pool:
                continue
            pool_docs = [docs_std[i] for i in pool]
            pool_golds = [golds[i] for i in pool]
            pool_weights = probs[pool, k]
            rng = np.random.default_rng(cfg.inner.seed + r * K + k)

            def featurize(j, labels, _k=k):
                return augment_features(
                    joint_features(pool_docs[j], labels, text_dim=d), _k, K, alpha
                )

            def model_of(weights_now, _j, _k=k):
                eff = effective(weights_now, _k)
                return FlatModel(eff[:d], eff[d:], names)

            steps, _ = _run_epochs(
                pool_docs, pool_golds, pool_weights, cfg.inner, rng,
                featurize, model_of, w, w_sum, steps,
            )

        losses = frozen_losses()
        j_start = frozen_objective(gating, descriptors, losses)
        if log is not None:
            log.append({"round": r, "phase": "weights", "J": j_start})
        gating, j_end = _descend_gating(gating, descriptors, losses, cfg)
        if log is not None:
            log.append({"round": r, "phase": "gating", "J": j_end, "J_start": j_start})

    final = w_sum / steps if (cfg.inner.averaging and steps) else w
    meta = {
        "kind": "mixture",
        "n_clusters": K,
        "alpha": alpha,
        "mu": cfg.mu,
        "outer_rounds": cfg.outer_rounds,
        "lambda_iters": cfg.lambda_iters,
        "seed": cfg.seed,
        "inner_seed": cfg.inner.seed,
        "inner_epochs": cfg.inner.num_epochs,
        "averaged": cfg.inner.averaging,
    }
    return ClusteredModel(
        alpha, gating, final[:D], final[D:].reshape(K, D), names, mean, std, meta
    )
