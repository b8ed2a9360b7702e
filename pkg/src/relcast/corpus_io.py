"""Line-delimited JSON corpus format.

One document per line, as an object with:

    id          string
    characters  list of character ids
    descriptor  list of numbers (optional; defaults to the mean of the
                document's edge feature vectors)
    edges       list of edge objects {a, b, gold?, ...} where every edge
                carries exactly one of
                  features   list of numbers (pre-aggregated dense vector)
                  cues       list of {name, value} sentence-level records,
                             optionally next to pair_cues
                             {character_similarity: number}

A corpus must use one representation throughout; cue-based corpora get
their feature layout from the union of observed cue names.  Gold labels
are +1/-1 and may be omitted for prediction-time corpora.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from relcast.features import (
    CueRecord,
    PairCues,
    VocabularyError,
    aggregate_pair_features,
    build_vocabulary,
)
from relcast.graph import Document, Edge, GraphValidationError, gold_labels


class CorpusFormatError(ValueError):
    """A corpus file is malformed or violates a document invariant."""


@dataclass(frozen=True)
class Corpus:
    """Parsed documents plus the corpus-wide feature layout."""

    documents: tuple[Document, ...]
    feature_names: tuple[str, ...]

    def training_pairs(self):
        """(document, gold labelling) pairs; every edge must carry gold."""
        return [(doc, gold_labels(doc)) for doc in self.documents]

    @property
    def dim(self) -> int:
        return len(self.feature_names)


def _fail(path, lineno, message):
    raise CorpusFormatError(f"{path}:{lineno}: {message}")


def _load_records(path):
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                _fail(path, lineno, f"invalid JSON ({exc.msg})")
            if not isinstance(raw, dict):
                _fail(path, lineno, "document record must be a JSON object")
            for key in ("id", "characters", "edges"):
                if key not in raw:
                    _fail(path, lineno, f"missing field {key!r}")
            records.append((lineno, raw))
    if not records:
        raise CorpusFormatError(f"{path}: empty corpus")
    return records


def _edge_mode(path, records):
    modes = set()
    for lineno, raw in records:
        for edge in raw["edges"]:
            has_features = "features" in edge
            has_cues = "cues" in edge
            if has_features == has_cues:
                _fail(path, lineno, "each edge needs exactly one of 'features' or 'cues'")
            modes.add("cues" if has_cues else "features")
    if len(modes) > 1:
        raise CorpusFormatError(f"{path}: corpus mixes dense 'features' and 'cues' edges")
    return modes.pop() if modes else "features"


def _parse_gold(path, lineno, edge):
    gold = edge.get("gold")
    if gold is not None and gold not in (1, -1):
        _fail(path, lineno, f"edge {edge.get('a')}--{edge.get('b')}: gold must be 1 or -1")
    return gold


def parse_corpus(path) -> Corpus:
    """Parse and validate a corpus file, reporting errors with line numbers."""
    records = _load_records(path)
    mode = _edge_mode(path, records)

    vocab = None
    if mode == "cues":
        all_records = []
        any_similarity = False
        for lineno, raw in records:
            for edge in raw["edges"]:
                for cue in edge["cues"]:
                    try:
                        all_records.append(
                            CueRecord((str(edge["a"]), str(edge["b"])), cue["name"], cue["value"])
                        )
                    except (KeyError, TypeError, ValueError) as exc:
                        _fail(path, lineno, f"bad cue record: {exc}")
                if edge.get("pair_cues", {}).get("character_similarity") is not None:
                    any_similarity = True
        vocab = build_vocabulary(all_records, include_character_similarity=any_similarity)

    documents = []
    for lineno, raw in records:
        edges = []
        for edge in raw["edges"]:
            gold = _parse_gold(path, lineno, edge)
            if mode == "features":
                feats = edge["features"]
            else:
                pair = (str(edge["a"]), str(edge["b"]))
                cue_records = [CueRecord(pair, c["name"], c["value"]) for c in edge["cues"]]
                sim = edge.get("pair_cues", {}).get("character_similarity")
                try:
                    feats = aggregate_pair_features(cue_records, PairCues(sim), vocab)
                except (VocabularyError, ValueError) as exc:
                    _fail(path, lineno, str(exc))
            try:
                edges.append(Edge(str(edge["a"]), str(edge["b"]), feats, gold))
            except (GraphValidationError, TypeError, ValueError) as exc:
                _fail(path, lineno, str(exc))

        descriptor = raw.get("descriptor")
        if descriptor is None:
            descriptor = (
                np.vstack([e.features for e in edges]).mean(axis=0)
                if edges else np.zeros(vocab.dim if vocab else 0)
            )
        try:
            documents.append(
                Document(str(raw["id"]), tuple(str(c) for c in raw["characters"]),
                         tuple(edges), descriptor)
            )
        except (GraphValidationError, TypeError, ValueError) as exc:
            _fail(path, lineno, str(exc))

    dims = {doc.n_text_features for doc in documents if doc.edges}
    if len(dims) > 1:
        raise CorpusFormatError(f"{path}: inconsistent feature dimensions {sorted(dims)}")
    desc_dims = {doc.descriptor.size for doc in documents}
    if len(desc_dims) > 1:
        raise CorpusFormatError(f"{path}: inconsistent descriptor dimensions {sorted(desc_dims)}")

    if vocab is not None:
        names = vocab.names
    else:
        d = dims.pop() if dims else 0
        names = tuple(f"f{i}" for i in range(d))
    return Corpus(tuple(documents), names)


def write_corpus(documents, path):
    """Write documents (dense-feature representation) as corpus JSONL."""
    with open(path, "w", encoding="utf-8") as handle:
        for doc in documents:
            record = {
                "id": doc.id,
                "characters": list(doc.characters),
                "descriptor": doc.descriptor.tolist(),
                "edges": [
                    {
                        "a": e.a,
                        "b": e.b,
                        **({"gold": e.gold} if e.gold is not None else {}),
                        "features": e.features.tolist(),
                    }
                    for e in doc.edges
                ],
            }
            handle.write(json.dumps(record) + "\n")
