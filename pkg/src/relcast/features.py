"""Per-pair feature vectors aggregated from pre-extracted sentence-level cues.

Upstream NLP emits one cue record per (pair, cue, sentence occurrence); this
module collapses those records into fixed-width vectors.  Real-valued cues
contribute their mean, max and cumulative sum; presence-style binary cues
contribute max and sum only.  Cues observed for no sentence default to 0,
the additive identity of the downstream feature map.  Character similarity
is computed per document rather than per sentence and passes through as-is.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import numpy as np

#: Presence-style cues: aggregating a mean over binary indicators adds nothing.
BINARY_CUES = frozenset(
    {"are_team", "relation_keyword", "frame_positive", "frame_negative", "frame_relationship"}
)

SIMILARITY_CUE = "character_similarity"

_REAL_AGGREGATORS = ("mean", "max", "sum")
_BINARY_AGGREGATORS = ("max", "sum")


class VocabularyError(ValueError):
    """A cue name is unknown to the vocabulary, or no cues exist at all."""


@dataclass(frozen=True)
class CueRecord:
    """One sentence-level cue observation for a character pair."""

    pair: tuple[str, str]
    name: str
    value: float

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(sorted(self.pair)))
        v = float(self.value)
        if not np.isfinite(v):
            raise ValueError(f"cue {self.name!r} on {self.pair}: non-finite value")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class PairCues:
    """Document-level cues attached to a pair (not tied to any sentence)."""

    character_similarity: float | None = None


@dataclass(frozen=True)
class FeatureVocabulary:
    """Fixed, ordered layout of derived feature names.

    Each entry is (cue_name, aggregator); document-level cues use the
    pseudo-aggregator "value" and keep their bare name.
    """

    entries: tuple[tuple[str, str], ...]

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(
            cue if agg == "value" else f"{cue}_{agg}" for cue, agg in self.entries
        )

    @cached_property
    def sentence_cues(self) -> frozenset:
        return frozenset(cue for cue, agg in self.entries if agg != "value")

    @property
    def dim(self) -> int:
        return len(self.entries)


def build_vocabulary(records, include_character_similarity: bool = False) -> FeatureVocabulary:
    """Derive the corpus-wide feature layout from every observed cue record.

    Takes the (flattened) cue records of the whole corpus.  Output ordering
    is sorted by cue name with a fixed aggregator order inside each cue, so
    rebuilding on the same corpus always yields the same layout.
    """
    names = sorted({r.name for r in records})
    if not names and not include_character_similarity:
        raise VocabularyError("empty corpus: no cue records to build a vocabulary from")
    entries = []
    for name in names:
        aggs = _BINARY_AGGREGATORS if name in BINARY_CUES else _REAL_AGGREGATORS
        entries.extend((name, agg) for agg in aggs)
    if include_character_similarity:
        entries.append((SIMILARITY_CUE, "value"))
    return FeatureVocabulary(tuple(entries))


def aggregate_pair_features(
    records, pair_cues: PairCues | None = None, vocab: FeatureVocabulary = None
) -> np.ndarray:
    """Collapse one pair's cue records into the vocabulary's feature vector."""
    if vocab is None:
        raise ValueError("a vocabulary is required")
    records = list(records)
    pairs = {r.pair for r in records}
    if len(pairs) > 1:
        raise ValueError(f"records mix pairs: {sorted(pairs)}")
    values = defaultdict(list)
    for r in records:
        if r.name not in vocab.sentence_cues:
            raise VocabularyError(f"cue {r.name!r} not in vocabulary")
        values[r.name].append(r.value)

    out = np.zeros(vocab.dim)
    for slot, (cue, agg) in enumerate(vocab.entries):
        if agg == "value":
            if pair_cues is not None and pair_cues.character_similarity is not None:
                out[slot] = pair_cues.character_similarity
            continue
        vs = values.get(cue)
        if not vs:
            continue
        if agg == "mean":
            out[slot] = float(np.mean(vs))
        elif agg == "max":
            out[slot] = float(np.max(vs))
        else:
            out[slot] = float(np.sum(vs))
    return out
