"""Versioned model persistence as human-readable JSON.

Weights are serialized through Python's repr-based float encoding, which
round-trips IEEE doubles exactly, so a saved model predicts identically
after loading.
"""

from __future__ import annotations

import json

from relcast.graph import FlatModel
from relcast.logreg import LRModel
from relcast.mixture import ClusteredModel

FORMAT_NAME = "relcast-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model file is unreadable, corrupt, or from an unsupported version."""


def save_model(model, path):
    """Persist an LR, flat structured, or clustered model."""
    payload = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if isinstance(model, LRModel):
        payload.update(
            kind="lr",
            weights=model.weights.tolist(),
            bias=model.bias,
            l2=model.l2,
            feature_means=model.feature_means.tolist(),
            feature_stds=model.feature_stds.tolist(),
            meta=model.meta,
        )
    elif isinstance(model, FlatModel):
        payload.update(
            kind="spr",
            text_weights=model.text_weights.tolist(),
            struct_weights=model.struct_weights.tolist(),
            feature_names=list(model.feature_names),
            feature_means=model.feature_means.tolist(),
            feature_stds=model.feature_stds.tolist(),
            meta=model.meta,
        )
    elif isinstance(model, ClusteredModel):
        payload.update(
            kind="mixture",
            alpha=model.alpha,
            gating=model.gating.tolist(),
            shared=model.shared.tolist(),
            cluster=model.cluster.tolist(),
            feature_names=list(model.feature_names),
            feature_means=model.feature_means.tolist(),
            feature_stds=model.feature_stds.tolist(),
            meta=model.meta,
        )
    else:
        raise ModelFormatError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=1, sort_keys=True)
        handle.write("\n")


def load_model(path):
    """Load a model saved by `save_model`, checking format and version."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a valid model file ({exc.msg})") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise ModelFormatError(f"{path}: not a {FORMAT_NAME} file")
    if payload.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model version {payload.get('version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    kind = payload.get("kind")
    if kind == "lr":
        return LRModel(
            payload["weights"], payload["bias"], payload["feature_means"],
            payload["feature_stds"], payload["l2"], payload.get("meta", {}),
        )
    if kind == "spr":
        return FlatModel(
            payload["text_weights"], payload["struct_weights"],
            tuple(payload["feature_names"]), payload["feature_means"],
            payload["feature_stds"], payload.get("meta", {}),
        )
    if kind == "mixture":
        return ClusteredModel(
            payload["alpha"], payload["gating"], payload["shared"], payload["cluster"],
            tuple(payload["feature_names"]), payload["feature_means"],
            payload["feature_stds"], payload.get("meta", {}),
        )
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
