"""In-process reference execution of pipelines: no HTTP, same algorithms.

This is the oracle side of the HTTP-transparency checks: a pipeline executed
through the service layer must produce a loss identical to running the same
learner objects locally on the same split.
"""

from __future__ import annotations

from .data import Dataset, SplitSpec, stratified_split
from .domain import IDENTITY_CONSTANT
from .learners import (
    DecisionStump,
    GaussianNaiveBayes,
    MajorityClass,
    MinMaxScaler,
    OneNearestNeighbor,
    ThreeNearestNeighbors,
    VarianceFilter,
)

_PREPROCESSORS = {
    "scaler": MinMaxScaler,
    "varsel": VarianceFilter,
    IDENTITY_CONSTANT: None,
}

_CLASSIFIERS = {
    "majority": MajorityClass,
    "knn1": OneNearestNeighbor,
    "stump": DecisionStump,
    "gnb": GaussianNaiveBayes,
    "knn3": ThreeNearestNeighbors,
}


def zero_one_loss(predicted: list[str], actual: list[str]) -> float:
    if len(predicted) != len(actual):
        raise ValueError("prediction/label length mismatch")
    wrong = sum(1 for p, y in zip(predicted, actual) if p != y)
    return wrong / len(actual)


def pipeline_loss(preprocessor: str, classifier: str, train: Dataset, validation: Dataset) -> float:
    """Train/evaluate one (preprocessor, classifier) pipeline locally."""
    pre_cls = _PREPROCESSORS[preprocessor]
    clf = _CLASSIFIERS[classifier]()
    if pre_cls is None:
        train_x, val_x = train.features, validation.features
    else:
        pre = pre_cls()
        pre.fit(train.features)
        train_x = pre.transform(train.features)
        val_x = pre.transform(validation.features)
    clf.train(train_x, train.labels)
    return zero_one_loss(clf.predict(val_x), validation.labels)


def all_pipeline_losses(ds: Dataset, spec: SplitSpec,
                        preprocessors=None, classifiers=None) -> dict[tuple[str, str], float]:
    """Brute force every pipeline on one split; the enumerate-all oracle."""
    train, validation = stratified_split(ds, spec)
    pres = preprocessors if preprocessors is not None else list(_PREPROCESSORS)
    clfs = classifiers if classifiers is not None else list(_CLASSIFIERS)
    return {
        (p, c): pipeline_loss(p, c, train, validation)
        for p in pres
        for c in clfs
    }
