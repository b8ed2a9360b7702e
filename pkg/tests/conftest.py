import itertools

import numpy as np

from relcast.graph import Document, Edge, FlatModel


def make_document(rng, max_chars=6, max_edges=12, dim=3, doc_id="doc", with_gold=False):
    """Random document: a subset of pairs over a small cast, Gaussian features."""
    n_chars = int(rng.integers(2, max_chars + 1))
    chars = [f"c{i:02d}" for i in range(n_chars)]
    pairs = list(itertools.combinations(chars, 2))
    perm = rng.permutation(len(pairs))
    count = int(rng.integers(0, min(max_edges, len(pairs)) + 1))
    edges = []
    for idx in perm[:count]:
        a, b = pairs[int(idx)]
        gold = int(rng.integers(0, 2) * 2 - 1) if with_gold else None
        edges.append(Edge(a, b, rng.normal(size=dim), gold))
    return Document(doc_id, tuple(chars), tuple(edges), rng.normal(size=2))


def random_model(rng, dim=3) -> FlatModel:
    return FlatModel(rng.normal(size=dim), rng.normal(size=4))


def random_labels(rng, n) -> np.ndarray:
    return rng.integers(0, 2, size=n) * 2 - 1
