"""Toy servicified learners and the primary host's service registry.

Everything here is deterministic: nearest-neighbor distance ties break toward
the lowest training index, majority ties toward the earliest label seen in
training order, stump ties toward the lowest attribute then lowest threshold.
All state round-trips through explicit JSON codecs so instances survive
restarts and stay portable across host implementations.
"""

from __future__ import annotations

import math
import re
from typing import Optional

from ..runtime.client import ServiceClient
from ..runtime.errors import ConflictError
from ..runtime.payload import SELF_HANDLE, Handle
from ..runtime.registry import Registry, ServiceClass, service_class_for

VARIANCE_FLOOR = 1e-9

_INSTANCE_URL_RE = re.compile(r"/[0-9]+$")


def _check_matrix(features, dim: Optional[int] = None):
    if not isinstance(features, list) or not features:
        raise ValueError("features must be a non-empty matrix")
    width = len(features[0]) if dim is None else dim
    for row in features:
        if len(row) != width:
            raise ValueError(f"feature row has {len(row)} attributes, expected {width}")
    return width


def _majority_label(labels: list[str]) -> str:
    counts: dict[str, int] = {}
    for y in labels:
        counts[y] = counts.get(y, 0) + 1
    best = None
    for y in labels:  # training order breaks ties
        if best is None or counts[y] > counts[best]:
            best = y
    return best


class MinMaxScaler:
    """Per-attribute min-max scaling to [0, 1]; constant attributes map to 0."""

    def __init__(self):
        self.mins: Optional[list[float]] = None
        self.maxs: Optional[list[float]] = None

    def fit(self, features):
        dim = _check_matrix(features)
        self.mins = [min(row[j] for row in features) for j in range(dim)]
        self.maxs = [max(row[j] for row in features) for j in range(dim)]
        return None

    def transform(self, features):
        if self.mins is None:
            raise ConflictError("transform before fit")
        _check_matrix(features, len(self.mins))
        out = []
        for row in features:
            scaled = []
            for j, x in enumerate(row):
                span = self.maxs[j] - self.mins[j]
                scaled.append((x - self.mins[j]) / span if span > 0 else 0.0)
            out.append(scaled)
        return out

    def encode_state(self) -> dict:
        return {"mins": self.mins, "maxs": self.maxs}

    @classmethod
    def decode_state(cls, doc: dict) -> "MinMaxScaler":
        obj = cls()
        obj.mins = doc.get("mins")
        obj.maxs = doc.get("maxs")
        return obj


class VarianceFilter:
    """Drops zero-variance attributes (all training values identical)."""

    def __init__(self):
        self.keep: Optional[list[int]] = None
        self.dim: Optional[int] = None

    def fit(self, features):
        dim = _check_matrix(features)
        self.dim = dim
        self.keep = [
            j for j in range(dim) if any(row[j] != features[0][j] for row in features)
        ]
        return None

    def transform(self, features):
        if self.keep is None:
            raise ConflictError("transform before fit")
        _check_matrix(features, self.dim)
        return [[row[j] for j in self.keep] for row in features]

    def encode_state(self) -> dict:
        return {"keep": self.keep, "dim": self.dim}

    @classmethod
    def decode_state(cls, doc: dict) -> "VarianceFilter":
        obj = cls()
        obj.keep = doc.get("keep")
        obj.dim = doc.get("dim")
        return obj


class MajorityClass:
    def __init__(self):
        self.label: Optional[str] = None

    def train(self, features, labels):
        _check_matrix(features)
        if len(labels) != len(features):
            raise ValueError("features and labels disagree on length")
        self.label = _majority_label(labels)
        return None

    def predict(self, features):
        if self.label is None:
            raise ConflictError("predict before train")
        _check_matrix(features)
        return [self.label for _ in features]

    def encode_state(self) -> dict:
        return {"label": self.label}

    @classmethod
    def decode_state(cls, doc: dict) -> "MajorityClass":
        obj = cls()
        obj.label = doc.get("label")
        return obj


def _sq_dist(a: list[float], b: list[float]) -> float:
    total = 0.0
    for x, y in zip(a, b):
        d = x - y
        total += d * d
    return total


class _StoredDataClassifier:
    """Shared plumbing for learners that memorize the training set."""

    def __init__(self):
        self.features: Optional[list[list[float]]] = None
        self.labels: Optional[list[str]] = None

    def train(self, features, labels):
        _check_matrix(features)
        if len(labels) != len(features):
            raise ValueError("features and labels disagree on length")
        self.features = [list(row) for row in features]
        self.labels = list(labels)
        return None

    def _require_trained(self, features):
        if self.features is None:
            raise ConflictError("predict before train")
        _check_matrix(features, len(self.features[0]))

    def encode_state(self) -> dict:
        return {"features": self.features, "labels": self.labels}

    @classmethod
    def decode_state(cls, doc: dict):
        obj = cls()
        obj.features = doc.get("features")
        obj.labels = doc.get("labels")
        return obj


class OneNearestNeighbor(_StoredDataClassifier):
    """1-NN, Euclidean; distance ties break toward the lowest training index."""

    def predict(self, features):
        self._require_trained(features)
        out = []
        for row in features:
            best_i = 0
            best_d = _sq_dist(row, self.features[0])
            for i in range(1, len(self.features)):
                d = _sq_dist(row, self.features[i])
                if d < best_d:
                    best_d = d
                    best_i = i
            out.append(self.labels[best_i])
        return out


class ThreeNearestNeighbors(_StoredDataClassifier):
    """3-NN with majority vote; ties fall to the closest tied label."""

    def predict(self, features):
        self._require_trained(features)
        k = min(3, len(self.features))
        out = []
        for row in features:
            order = sorted(range(len(self.features)),
                           key=lambda i: (_sq_dist(row, self.features[i]), i))[:k]
            votes: dict[str, int] = {}
            for i in order:
                y = self.labels[i]
                votes[y] = votes.get(y, 0) + 1
            top = max(votes.values())
            winner = next(self.labels[i] for i in order if votes[self.labels[i]] == top)
            out.append(winner)
        return out


class DecisionStump:
    """Best single-attribute threshold by training accuracy.

    Candidate thresholds are midpoints between consecutive distinct values;
    rows with value <= threshold take the left label. Ties break toward the
    lowest attribute index, then the lowest threshold. Degenerate data (no
    candidate split anywhere) falls back to the global majority.
    """

    def __init__(self):
        self.attribute: Optional[int] = None
        self.threshold: Optional[float] = None
        self.left_label: Optional[str] = None
        self.right_label: Optional[str] = None

    def train(self, features, labels):
        dim = _check_matrix(features)
        if len(labels) != len(features):
            raise ValueError("features and labels disagree on length")
        n = len(labels)
        best = None  # (accuracy, attr, threshold, left, right); maximize accuracy
        for j in range(dim):
            values = sorted({row[j] for row in features})
            for lo, hi in zip(values, values[1:]):
                theta = (lo + hi) / 2.0
                left = [labels[i] for i in range(n) if features[i][j] <= theta]
                right = [labels[i] for i in range(n) if features[i][j] > theta]
                left_label = _majority_label(left) if left else _majority_label(labels)
                right_label = _majority_label(right) if right else _majority_label(labels)
                correct = sum(
                    1 for i in range(n)
                    if (left_label if features[i][j] <= theta else right_label) == labels[i]
                )
                acc = correct / n
                if best is None or acc > best[0]:
                    best = (acc, j, theta, left_label, right_label)
        if best is None:
            fallback = _majority_label(labels)
            best = (0.0, 0, 0.0, fallback, fallback)
        _, self.attribute, self.threshold, self.left_label, self.right_label = best
        return None

    def predict(self, features):
        if self.left_label is None:
            raise ConflictError("predict before train")
        _check_matrix(features)
        return [
            self.left_label if row[self.attribute] <= self.threshold else self.right_label
            for row in features
        ]

    def encode_state(self) -> dict:
        return {
            "attribute": self.attribute,
            "threshold": self.threshold,
            "left_label": self.left_label,
            "right_label": self.right_label,
        }

    @classmethod
    def decode_state(cls, doc: dict) -> "DecisionStump":
        obj = cls()
        obj.attribute = doc.get("attribute")
        obj.threshold = doc.get("threshold")
        obj.left_label = doc.get("left_label")
        obj.right_label = doc.get("right_label")
        return obj


class GaussianNaiveBayes:
    """Per-class per-attribute mean/variance, variance floored at 1e-9.

    Class priors are training frequencies; prediction is the arg-max joint
    log-likelihood, ties falling to the class seen earliest in training order.
    """

    def __init__(self):
        self.classes: Optional[list[str]] = None
        self.priors: Optional[list[float]] = None
        self.means: Optional[list[list[float]]] = None
        self.variances: Optional[list[list[float]]] = None

    def train(self, features, labels):
        dim = _check_matrix(features)
        if len(labels) != len(features):
            raise ValueError("features and labels disagree on length")
        classes: list[str] = []
        for y in labels:
            if y not in classes:
                classes.append(y)
        self.classes, self.priors, self.means, self.variances = classes, [], [], []
        n = len(labels)
        for y in classes:
            rows = [features[i] for i in range(n) if labels[i] == y]
            count = len(rows)
            self.priors.append(count / n)
            means = [sum(row[j] for row in rows) / count for j in range(dim)]
            variances = [
                max(sum((row[j] - means[j]) ** 2 for row in rows) / count, VARIANCE_FLOOR)
                for j in range(dim)
            ]
            self.means.append(means)
            self.variances.append(variances)
        return None

    def predict(self, features):
        if self.classes is None:
            raise ConflictError("predict before train")
        _check_matrix(features, len(self.means[0]))
        out = []
        for row in features:
            best_c = 0
            best_lp = self._log_joint(row, 0)
            for c in range(1, len(self.classes)):
                lp = self._log_joint(row, c)
                if lp > best_lp:
                    best_lp = lp
                    best_c = c
            out.append(self.classes[best_c])
        return out

    def _log_joint(self, row: list[float], c: int) -> float:
        lp = math.log(self.priors[c])
        for j, x in enumerate(row):
            var = self.variances[c][j]
            lp += -0.5 * math.log(2.0 * math.pi * var) - (x - self.means[c][j]) ** 2 / (2.0 * var)
        return lp

    def encode_state(self) -> dict:
        return {
            "classes": self.classes,
            "priors": self.priors,
            "means": self.means,
            "variances": self.variances,
        }

    @classmethod
    def decode_state(cls, doc: dict) -> "GaussianNaiveBayes":
        obj = cls()
        obj.classes = doc.get("classes")
        obj.priors = doc.get("priors")
        obj.means = doc.get("means")
        obj.variances = doc.get("variances")
        return obj


# ---------------------------------------------------------------------------
# The pipeline template class: fixed train/predict, fields set by the
# constructor composition. Preprocessor/classifier fields hold handle URLs;
# a class URL (no trailing id) marks a stateless preprocessor with no fit.


def _is_instance_url(url: str) -> bool:
    return bool(_INSTANCE_URL_RE.search(url))


class PipelineService:
    client = ServiceClient()

    def __init__(self):
        self.preprocessor: Optional[str] = None
        self.classifier: Optional[str] = None
        self.trained = False

    def set_preprocessor(self, p):
        self.preprocessor = p.url if isinstance(p, Handle) else p
        return SELF_HANDLE

    def set_classifier(self, c):
        self.classifier = c.url if isinstance(c, Handle) else c
        return SELF_HANDLE

    def _transform(self, features, fit: bool):
        if fit and _is_instance_url(self.preprocessor):
            self.client.invoke(self.preprocessor, "fit", {"features": features})
        return self.client.invoke(self.preprocessor, "transform", {"features": features})

    def train(self, features, labels):
        if self.preprocessor is None or self.classifier is None:
            raise ConflictError("train before the pipeline is fully configured")
        transformed = self._transform(features, fit=True)
        self.client.invoke(self.classifier, "train", {"features": transformed, "labels": labels})
        self.trained = True
        return None

    def predict(self, features):
        if not self.trained:
            raise ConflictError("predict before train")
        transformed = self._transform(features, fit=False)
        return self.client.invoke(self.classifier, "predict", {"features": transformed})

    def encode_state(self) -> dict:
        return {"preprocessor": self.preprocessor, "classifier": self.classifier,
                "trained": self.trained}

    @classmethod
    def decode_state(cls, doc: dict) -> "PipelineService":
        obj = cls()
        obj.preprocessor = doc.get("preprocessor")
        obj.classifier = doc.get("classifier")
        obj.trained = bool(doc.get("trained", False))
        return obj


# ---------------------------------------------------------------------------
# Static test services


def identity_transform(features):
    _check_matrix(features)
    return features


def echo(value=None):
    return value


def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"expected a number, got {x!r}")
    return x


ARITH_STATICS = {
    "add": lambda a, b: _num(a) + _num(b),
    "mul": lambda a, b: _num(a) * _num(b),
    "sub": lambda a, b: _num(a) - _num(b),
    "neg": lambda a: -_num(a),
}


# ---------------------------------------------------------------------------
# Registry assembly


_FIT_TRANSFORM = {"fit": "fit", "transform": "transform"}
_TRAIN_PREDICT = {"train": "train", "predict": "predict"}


def build_registry(disabled: set[str] | None = None) -> Registry:
    """The primary host's toy portfolio, incl. the pipeline template class."""
    registry = Registry(disabled=disabled)
    registry.add(service_class_for(MinMaxScaler, "scaler", _FIT_TRANSFORM))
    registry.add(service_class_for(VarianceFilter, "varsel", _FIT_TRANSFORM))
    registry.add(service_class_for(MajorityClass, "majority", _TRAIN_PREDICT))
    registry.add(service_class_for(OneNearestNeighbor, "knn1", _TRAIN_PREDICT))
    registry.add(service_class_for(DecisionStump, "stump", _TRAIN_PREDICT))
    registry.add(service_class_for(GaussianNaiveBayes, "gnb", _TRAIN_PREDICT))
    registry.add(service_class_for(ThreeNearestNeighbors, "knn3", _TRAIN_PREDICT))
    registry.add(service_class_for(
        PipelineService, "pipeline",
        {"setPreprocessor": "set_preprocessor", "setClassifier": "set_classifier",
         "train": "train", "predict": "predict"},
    ))
    registry.add(ServiceClass(name="identity", statics={"transform": identity_transform}))
    registry.add(ServiceClass(name="echo", statics={"echo": echo}))
    registry.add(ServiceClass(name="arith", statics=dict(ARITH_STATICS)))
    return registry
