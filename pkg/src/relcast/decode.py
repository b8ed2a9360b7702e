"""Argmax decoding of edge labels under a flat linear model.

The objective decomposes over triangle-connected components: an edge in no
triangle is labelled by the sign of its text score alone, components small
enough to enumerate are solved exactly over all 2^k sign vectors, and
oversized components fall back to greedy single-flip ascent from a
text-sign start plus random restarts.  Exhaustive ties break toward the
first maximizer when sign vectors are enumerated in sorted edge order with
+1 tried before -1, which keeps results reproducible.

`brute_force_oracle` enumerates the full joint space without any
decomposition; it exists to check the decoder, not to be fast.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from relcast.graph import (
    Document,
    FlatModel,
    GraphValidationError,
    enumerate_triangles,
    score,
    triangle_components,
    validate_labels,
)

#: Flip budget per edge for greedy ascent before giving up.
GREEDY_MAX_ROUNDS = 100

#: Largest instance the brute-force oracle will accept.
MAX_ORACLE_EDGES = 24

_CHUNK = 1 << 16


@dataclass(frozen=True)
class DecodeConfig:
    """Knobs for the decoding search."""

    component_cap: int = 20
    confidence_threshold: float = 0.5
    greedy_restarts: int = 5
    infer_ungrounded: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.component_cap < 1:
            raise ValueError("component_cap must be >= 1")
        if self.greedy_restarts < 1:
            raise ValueError("greedy_restarts must be >= 1")
        if self.confidence_threshold < 0:
            raise ValueError("confidence_threshold must be >= 0")


def _check_dims(model: FlatModel, doc: Document):
    if doc.edges and doc.n_text_features != model.dim:
        raise GraphValidationError(
            f"document {doc.id!r} has {doc.n_text_features} text features, "
            f"model expects {model.dim}"
        )


def _enumerate_component(text_scores: np.ndarray, triangles, struct_weights) -> np.ndarray:
    """Exact search over all sign vectors of one component.

    Assignments are enumerated lexicographically (first edge most
    significant, +1 before -1) and the first maximizer is kept.
    """
    k = text_scores.size
    by_npos = np.asarray(struct_weights)[::-1]  # weight indexed by count of +1 labels
    shifts = k - 1 - np.arange(k)
    best_score = -np.inf
    best_bits = None
    for lo in range(0, 1 << k, _CHUNK):
        hi = min(lo + _CHUNK, 1 << k)
        codes = np.arange(lo, hi, dtype=np.int64)[:, None]
        bits = (codes >> shifts) & 1  # bit 0 -> label +1
        totals = (1.0 - 2.0 * bits) @ text_scores
        for i, j, l in triangles:
            npos = (3 - bits[:, i] - bits[:, j] - bits[:, l]).astype(np.intp)
            totals += by_npos[npos]
        at = int(np.argmax(totals))
        if totals[at] > best_score:
            best_score = float(totals[at])
            best_bits = bits[at]
    return np.where(best_bits == 0, 1, -1).astype(np.int64)


def _component_total(labels, text_scores, triangles, by_npos) -> float:
    total = float(labels @ text_scores)
    for i, j, l in triangles:
        npos = int(labels[i] > 0) + int(labels[j] > 0) + int(labels[l] > 0)
        total += by_npos[npos]
    return total


def _greedy_component(text_scores, triangles, struct_weights, cfg: DecodeConfig, rng) -> np.ndarray:
    """Single-flip coordinate ascent with random restarts for oversized components.

    Every restart keeps high-confidence edges (|text score| >= threshold) at
    their text sign in the starting point; each accepted flip strictly
    increases the component score, so the final labelling is 1-flip optimal.
    """
    k = text_scores.size
    by_npos = np.asarray(struct_weights)[::-1]
    tris_by_edge = [[] for _ in range(k)]
    for t in triangles:
        for e in t:
            tris_by_edge[e].append(t)

    base = np.where(text_scores >= 0, 1, -1).astype(np.int64)
    confident = np.abs(text_scores) >= cfg.confidence_threshold

    def ascend(labels):
        total = _component_total(labels, text_scores, triangles, by_npos)
        for _ in range(GREEDY_MAX_ROUNDS * k):
            best_gain, best_edge = 0.0, -1
            for e in range(k):
                gain = -2.0 * labels[e] * text_scores[e]
                for i, j, l in tris_by_edge[e]:
                    npos = int(labels[i] > 0) + int(labels[j] > 0) + int(labels[l] > 0)
                    flipped = npos - 1 if labels[e] > 0 else npos + 1
                    gain += by_npos[flipped] - by_npos[npos]
                if gain > best_gain:
                    best_gain, best_edge = gain, e
            if best_edge < 0:
                break
            labels[best_edge] = -labels[best_edge]
            total += best_gain
        return labels, _component_total(labels, text_scores, triangles, by_npos)

    best_labels, best_total = ascend(base.copy())
    for _ in range(cfg.greedy_restarts - 1):
        start = base.copy()
        loose = ~confident
        start[loose] = rng.integers(0, 2, size=int(loose.sum())) * 2 - 1
        labels, total = ascend(start)
        if total > best_total:
            best_labels, best_total = labels, total
    return best_labels


def decode(model: FlatModel, doc: Document, cfg: DecodeConfig | None = None):
    """Highest-scoring labelling of all edges, with its score.

    Exact wherever every triangle-connected component fits under the
    enumeration cap.  The returned score is recomputed with `score`, so it
    always equals score(model, doc, labels).
    """
    cfg = cfg or DecodeConfig()
    n = len(doc.edges)
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    _check_dims(model, doc)
    text_scores = model.standardize(doc.feature_matrix) @ model.text_weights
    triangles = enumerate_triangles(doc)
    components = triangle_components(doc, triangles)
    rng = np.random.default_rng(cfg.seed)

    labels = np.empty(n, dtype=np.int64)
    for comp in components:
        if len(comp) == 1:  # singletons are never in a triangle
            e = comp[0]
            labels[e] = 1 if text_scores[e] >= 0 else -1
            continue
        local = {e: i for i, e in enumerate(comp)}
        tris = [
            (local[i], local[j], local[k])
            for i, j, k in triangles
            if i in local  # a triangle's edges always share one component
        ]
        s = text_scores[comp]
        if len(comp) <= cfg.component_cap:
            part = _enumerate_component(s, tris, model.struct_weights)
        else:
            part = _greedy_component(s, tris, model.struct_weights, cfg, rng)
        labels[np.asarray(comp)] = part
    return labels, score(model, doc, labels)


def brute_force_oracle(model: FlatModel, doc: Document):
    """Exhaustive maximizer over every joint labelling; reference for `decode`.

    Enumerates the full 2^n space directly with the same lexicographic +1
    first order, independent of the component decomposition.
    """
    n = len(doc.edges)
    if n > MAX_ORACLE_EDGES:
        raise ValueError(f"{n} edges exceeds the brute-force cap of {MAX_ORACLE_EDGES}")
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    _check_dims(model, doc)
    text_scores = model.standardize(doc.feature_matrix) @ model.text_weights
    triangles = enumerate_triangles(doc)
    by_npos = np.asarray(model.struct_weights)[::-1]
    shifts = n - 1 - np.arange(n)

    best_score = -np.inf
    best_bits = None
    for lo in range(0, 1 << n, _CHUNK):
        hi = min(lo + _CHUNK, 1 << n)
        codes = np.arange(lo, hi, dtype=np.int64)[:, None]
        bits = (codes >> shifts) & 1
        totals = (1.0 - 2.0 * bits) @ text_scores
        for i, j, k in triangles:
            npos = (3 - bits[:, i] - bits[:, j] - bits[:, k]).astype(np.intp)
            totals += by_npos[npos]
        at = int(np.argmax(totals))
        if totals[at] > best_score:
            best_score = float(totals[at])
            best_bits = bits[at]
    labels = np.where(best_bits == 0, 1, -1).astype(np.int64)
    return labels, score(model, doc, labels)


def infer_ungrounded(model: FlatModel, doc: Document, labels, cfg: DecodeConfig | None = None):
    """Labels for unannotated pairs that close triangles over grounded edges.

    A candidate pair must complete at least one triangle whose other two
    edges are grounded in the text; its label maximizes the summed census
    weight over all such closures (ties to +1), and only candidates with a
    strictly positive gain are emitted.  Grounded labels never change.
    """
    arr = validate_labels(doc, labels)
    by_npos = np.asarray(model.struct_weights)[::-1]
    labelled: dict[str, dict[str, int]] = {c: {} for c in doc.characters}
    for e, edge in enumerate(doc.edges):
        labelled[edge.a][edge.b] = int(arr[e])
        labelled[edge.b][edge.a] = int(arr[e])

    inferred = []
    for u, v in itertools.combinations(doc.characters, 2):
        if (u, v) in doc.pair_index:
            continue
        common = labelled[u].keys() & labelled[v].keys()
        if not common:
            continue
        gain_pos = gain_neg = 0.0
        for c in common:
            grounded = int(labelled[u][c] > 0) + int(labelled[v][c] > 0)
            gain_pos += by_npos[grounded + 1]
            gain_neg += by_npos[grounded]
        label = 1 if gain_pos >= gain_neg else -1
        if max(gain_pos, gain_neg) > 0:
            inferred.append(((u, v), label))
    return inferred
