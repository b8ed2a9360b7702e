"""Signed character graphs and the joint text+structure feature map.

A narrative document is an undirected graph: characters are nodes and every
annotated character pair carries a text feature vector plus an optional
relationship label (+1 cooperative, -1 adversarial).  A labelling of all
edges is scored linearly from two feature blocks: the sign-weighted sum of
per-pair text features, and the counts of the four signed triangle
configurations (clique, love triangle, common enemy, mexican standoff).

Characters are plain string ids; documents keep characters and edges in
sorted order so every downstream tie-break is reproducible.  All types are
immutable after construction (feature arrays are frozen), so they can be
shared freely across threads.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

CENSUS_NAMES = ("clique", "love_triangle", "common_enemy", "mexican_standoff")


class GraphValidationError(ValueError):
    """A document (or model/document pairing) violates a structural invariant."""


class AssignmentError(ValueError):
    """Edge labels are missing, incomplete, or outside {+1, -1}."""


def _frozen(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Edge:
    """One annotated character pair with its per-pair text feature vector.

    Endpoints are normalized to sorted order so the unordered pair (a, b)
    has a single canonical representation.
    """

    a: str
    b: str
    features: np.ndarray
    gold: int | None = None

    def __post_init__(self):
        if self.a == self.b:
            raise GraphValidationError(f"self-edge on character {self.a!r}")
        a, b = sorted((self.a, self.b))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        feats = np.array(self.features, dtype=np.float64)
        if feats.ndim != 1:
            raise GraphValidationError(f"edge {a}--{b}: features must be a flat vector")
        if not np.all(np.isfinite(feats)):
            raise GraphValidationError(f"edge {a}--{b}: non-finite feature value")
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        if self.gold is not None:
            g = int(self.gold)
            if g not in (-1, 1):
                raise GraphValidationError(f"edge {a}--{b}: gold label must be +1 or -1")
            object.__setattr__(self, "gold", g)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.a, self.b)


@dataclass(frozen=True, eq=False)
class Document:
    """A narrative document: characters, pair edges, and a content descriptor."""

    id: str
    characters: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    descriptor: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        chars = tuple(sorted(self.characters))
        if any(not c for c in chars):
            raise GraphValidationError(f"document {self.id!r}: empty character id")
        if len(set(chars)) != len(chars):
            raise GraphValidationError(f"document {self.id!r}: duplicate character ids")
        declared = set(chars)
        edges = tuple(sorted(self.edges, key=lambda e: e.pair))
        seen = set()
        dim = None
        for e in edges:
            if e.a not in declared or e.b not in declared:
                raise GraphValidationError(
                    f"document {self.id!r}: edge {e.a}--{e.b} names an undeclared character"
                )
            if e.pair in seen:
                raise GraphValidationError(f"document {self.id!r}: duplicate edge {e.a}--{e.b}")
            seen.add(e.pair)
            if dim is None:
                dim = e.features.size
            elif e.features.size != dim:
                raise GraphValidationError(
                    f"document {self.id!r}: edge {e.a}--{e.b} has {e.features.size} "
                    f"features, expected {dim}"
                )
        desc = np.array(self.descriptor, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(desc)):
            raise GraphValidationError(f"document {self.id!r}: non-finite descriptor")
        desc.flags.writeable = False
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "descriptor", desc)

    @cached_property
    def pair_index(self) -> dict[tuple[str, str], int]:
        return {e.pair: i for i, e in enumerate(self.edges)}

    @cached_property
    def feature_matrix(self) -> np.ndarray:
        """Edge features stacked row-wise, shape (n_edges, d)."""
        if not self.edges:
            return _frozen(np.zeros((0, 0)))
        mat = np.vstack([e.features for e in self.edges])
        mat.flags.writeable = False
        return mat

    @property
    def n_text_features(self) -> int:
        return self.feature_matrix.shape[1]


def gold_labels(doc: Document) -> np.ndarray:
    """Gold assignment array for a fully annotated document."""
    missing = [e.pair for e in doc.edges if e.gold is None]
    if missing:
        raise AssignmentError(f"document {doc.id!r}: unlabeled edge {missing[0]}")
    return np.array([e.gold for e in doc.edges], dtype=np.int64)


def validate_labels(doc: Document, labels) -> np.ndarray:
    """Check that an assignment labels every edge with +1 or -1."""
    arr = np.asarray(labels)
    if arr.shape != (len(doc.edges),):
        raise AssignmentError(
            f"document {doc.id!r}: assignment has {arr.size} labels for {len(doc.edges)} edges"
        )
    if arr.size and not np.all(np.isin(arr, (-1, 1))):
        raise AssignmentError(f"document {doc.id!r}: labels must be +1 or -1")
    return arr.astype(np.int64, copy=False)


def triangles_of_pairs(pairs) -> list[tuple[int, int, int]]:
    """Edge-index triples of all triangles in an undirected pair list.

    Pairs must be unique with sorted endpoints.  Triples follow the
    lexicographic order of the character triple (a, b, c) and are given as
    the indices of the (a,b), (a,c), (b,c) pairs.
    """
    index = {p: i for i, p in enumerate(pairs)}
    adjacency: dict[str, set[str]] = defaultdict(set)
    for a, b in pairs:
        adjacency[a].add(b)
        adjacency[b].add(a)
    triangles = []
    for a, b in sorted(pairs):
        common = adjacency[a] & adjacency[b]
        for c in sorted(common):
            if c > b:  # count each triangle once, at its lexicographically first pair
                triangles.append((index[(a, b)], index[(a, c)], index[(b, c)]))
    return triangles


def enumerate_triangles(doc: Document) -> list[tuple[int, int, int]]:
    """All triangles of a document as edge-index triples, in deterministic order."""
    return triangles_of_pairs([e.pair for e in doc.edges])


@dataclass(frozen=True)
class TriadCensus:
    """Counts of the four signed triangle configurations."""

    clique: int = 0
    love_triangle: int = 0
    common_enemy: int = 0
    mexican_standoff: int = 0

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.clique, self.love_triangle, self.common_enemy, self.mexican_standoff],
            dtype=np.float64,
        )

    @property
    def total(self) -> int:
        return self.clique + self.love_triangle + self.common_enemy + self.mexican_standoff


def triad_census(doc: Document, labels, triangles=None) -> TriadCensus:
    """Classify every triangle by its sign multiset and count the four kinds.

    A triangle with 3, 2, 1 or 0 positive edges is a clique, love triangle,
    common enemy or mexican standoff respectively.
    """
    arr = np.asarray(labels)
    if arr.shape != (len(doc.edges),):
        raise AssignmentError(
            f"document {doc.id!r}: assignment has {arr.size} labels for {len(doc.edges)} edges"
        )
    if triangles is None:
        triangles = enumerate_triangles(doc)
    counts = [0, 0, 0, 0]
    for i, j, k in triangles:
        trio = arr[[i, j, k]]
        if not np.all(np.isin(trio, (-1, 1))):
            bad = (i, j, k)[int(np.argmin(np.isin(trio, (-1, 1))))]
            raise AssignmentError(
                f"document {doc.id!r}: edge {doc.edges[bad].pair} in a triangle has no +1/-1 label"
            )
        counts[3 - int(np.sum(trio > 0))] += 1
    return TriadCensus(*counts)


def joint_features(doc: Document, labels, text_dim: int | None = None) -> np.ndarray:
    """Joint feature vector of a labelling: sign-weighted text sums, then census.

    The first d entries are sum_e y_e * features_e; the trailing four are the
    triad census counts in fixed order.  `text_dim` pins d for edgeless
    documents, where it cannot be inferred.
    """
    arr = validate_labels(doc, labels)
    if doc.edges:
        d = doc.n_text_features
        if text_dim is not None and text_dim != d:
            raise GraphValidationError(
                f"document {doc.id!r} has {d} text features, expected {text_dim}"
            )
        text = arr @ doc.feature_matrix
    else:
        text = np.zeros(text_dim or 0)
    return np.concatenate([text, triad_census(doc, arr).as_array()])


@dataclass(frozen=True, eq=False)
class FlatModel:
    """Linear model over text features plus the four triangle-census counts.

    Feature standardization statistics (z-score mean and stddev, frozen at
    training time) are applied to edge features before scoring so that
    prediction is reproducible independent of the training corpus.
    """

    text_weights: np.ndarray
    struct_weights: np.ndarray
    feature_names: tuple[str, ...] = ()
    feature_means: np.ndarray | None = None
    feature_stds: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        tw = _frozen(self.text_weights)
        sw = _frozen(self.struct_weights)
        if sw.shape != (4,):
            raise GraphValidationError("struct_weights must have exactly 4 entries")
        d = tw.size
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(d))
        if len(names) != d:
            raise GraphValidationError(f"{len(names)} feature names for {d} text weights")
        means = _frozen(np.zeros(d) if self.feature_means is None else self.feature_means)
        stds = _frozen(np.ones(d) if self.feature_stds is None else self.feature_stds)
        if means.shape != (d,) or stds.shape != (d,):
            raise GraphValidationError("standardization stats must match the text dimension")
        if np.any(stds <= 0):
            raise GraphValidationError("standardization stddevs must be positive")
        object.__setattr__(self, "text_weights", tw)
        object.__setattr__(self, "struct_weights", sw)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "feature_means", means)
        object.__setattr__(self, "feature_stds", stds)

    @property
    def dim(self) -> int:
        return self.text_weights.size

    @cached_property
    def weights(self) -> np.ndarray:
        """Full weight vector: text block followed by the 4 census weights."""
        return _frozen(np.concatenate([self.text_weights, self.struct_weights]))

    def standardize(self, features: np.ndarray) -> np.ndarray:
        """Z-score edge features with the model's frozen statistics."""
        return (features - self.feature_means) / self.feature_stds


def score(model: FlatModel, doc: Document, labels) -> float:
    """Linear goodness of a labelling: model weights dotted with joint features.

    Edge features are standardized with the model's statistics first; with
    identity statistics this equals dot(weights, joint_features(doc, labels)).
    """
    arr = validate_labels(doc, labels)
    if doc.edges:
        if doc.n_text_features != model.dim:
            raise GraphValidationError(
                f"document {doc.id!r} has {doc.n_text_features} text features, "
                f"model expects {model.dim}"
            )
        text = arr @ model.standardize(doc.feature_matrix)
    else:
        text = np.zeros(model.dim)
    phi = np.concatenate([text, triad_census(doc, arr).as_array()])
    return float(model.weights @ phi)


def triangle_components(doc: Document, triangles=None) -> list[list[int]]:
    """Partition edge indices into triangle-connected components.

    Two edges share a component when a chain of triangles links them; edges
    outside every triangle are singleton components.  Components are listed
    by their smallest edge index, each sorted ascending.
    """
    n = len(doc.edges)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if triangles is None:
        triangles = enumerate_triangles(doc)
    for i, j, k in triangles:
        ri, rj, rk = find(i), find(j), find(k)
        parent[rj] = ri
        parent[rk] = ri
    groups: dict[int, list[int]] = defaultdict(list)
    for e in range(n):
        groups[find(e)].append(e)
    return sorted(groups.values(), key=lambda g: g[0])
