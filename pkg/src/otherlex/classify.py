"""Binary classifiers over document vectors.

Three trainers share the LabeledVector input: a small feed-forward network
(tanh hidden layers, sigmoid output, full-batch gradient descent), logistic
regression, and Gaussian naive Bayes.  A bag-of-n-grams featureizer covers
the no-embedding baseline.  `mlp_loss_and_grads` and `logreg_loss_and_grads`
are pure functions of their parameters so the backprop arithmetic can be
checked against central finite differences.

All training is deterministic given the seed.  Labels are 0 (not hateful)
and 1 (hateful); predicted label is 1 iff probability >= threshold, with the
tie at exactly 0.5 going to class 1.
"""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .parse import ParseGraph, filter_dependencies

_MAGIC = b"OLCF"
_FORMAT_VERSION = 1
_KIND_CODES = {"mlp": 1, "logreg": 2, "gnb": 3}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}


@dataclass(frozen=True)
class LabeledVector:
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: int = 2
    hidden_units: int = 5
    epochs: int = 200
    activation: str = "tanh"
    lr: float = 0.05
    seed: int = 1

    def __post_init__(self) -> None:
        if self.hidden_layers < 1:
            raise ValueError("hidden_layers must be >= 1")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class ClassifierModel:
    """Trained classifier: named parameter arrays plus a decision threshold.

    mlp    -> W0/b0 .. Wn/bn, applied left to right, last layer is the logit
    logreg -> w (weights) and b (1-element bias)
    gnb    -> mean/var (one row per class) and log_prior (length 2)
    """

    kind: str
    arrays: dict[str, np.ndarray]
    threshold: float = 0.5
    meta: dict[str, str] = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        if self.kind == "mlp":
            return self.arrays["W0"].shape[0]
        if self.kind == "logreg":
            return self.arrays["w"].shape[0]
        return self.arrays["mean"].shape[1]


def _as_matrix(data: Sequence[LabeledVector]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise DataError("no training examples")
    try:
        X = np.asarray([np.asarray(lv.features, dtype=np.float64) for lv in data])
    except ValueError as exc:
        raise DataError("feature vectors have inconsistent dimensions") from exc
    if X.ndim != 2:
        raise DataError("feature vectors have inconsistent dimensions")
    if not np.isfinite(X).all():
        raise DataError("non-finite feature values")
    y = np.asarray([lv.label for lv in data], dtype=np.float64)
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise DataError("labels must be 0 or 1")
    return X, y


def _require_both_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise DataError("training data contains a single class")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def mlp_forward(
    weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], X: np.ndarray
) -> tuple[list[np.ndarray], np.ndarray]:
    """Layer activations (input first) and the final logits."""
    activations = [X]
    for W, b in zip(weights[:-1], biases[:-1]):
        activations.append(np.tanh(activations[-1] @ W + b))
    logits = (activations[-1] @ weights[-1] + biases[-1]).ravel()
    return activations, logits


def mlp_loss_and_grads(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy of the network on (X, y) and its parameter gradients."""
    activations, logits = mlp_forward(weights, biases, X)
    n = X.shape[0]
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    delta = ((_sigmoid(logits) - y) / n)[:, None]
    grad_w: list[np.ndarray] = []
    grad_b: list[np.ndarray] = []
    for i in range(len(weights) - 1, -1, -1):
        grad_w.append(activations[i].T @ delta)
        grad_b.append(delta.sum(axis=0))
        if i > 0:
            # tanh'(z) expressed through the activation itself
            delta = (delta @ weights[i].T) * (1.0 - activations[i] ** 2)
    grad_w.reverse()
    grad_b.reverse()
    return loss, grad_w, grad_b


def train_mlp(data: Sequence[LabeledVector], cfg: MlpConfig = MlpConfig()) -> ClassifierModel:
    """Full-batch gradient descent for exactly cfg.epochs epochs."""
    X, y = _as_matrix(data)
    _require_both_classes(y)
    rng = np.random.default_rng(cfg.seed)
    dims = [X.shape[1]] + [cfg.hidden_units] * cfg.hidden_layers + [1]
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    # divergence is detected by the finiteness check, not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            loss, grad_w, grad_b = mlp_loss_and_grads(weights, biases, X, y)
            if not np.isfinite(loss):
                raise NumericalError(f"training diverged: non-finite loss at epoch {epoch}")
            for W, g in zip(weights, grad_w):
                W -= cfg.lr * g
            for b, g in zip(biases, grad_b):
                b -= cfg.lr * g
    arrays: dict[str, np.ndarray] = {}
    for i, (W, b) in enumerate(zip(weights, biases)):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
    meta = {
        "activation": cfg.activation,
        "epochs": str(cfg.epochs),
        "lr": repr(cfg.lr),
        "seed": str(cfg.seed),
    }
    return ClassifierModel(kind="mlp", arrays=arrays, meta=meta)


def logreg_loss_and_grads(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float = 0.0
) -> tuple[float, np.ndarray, float]:
    logits = X @ w + b
    n = X.shape[0]
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits) + l2 * (w @ w))
    delta = (_sigmoid(logits) - y) / n
    grad_w = X.T @ delta + 2.0 * l2 * w
    return loss, grad_w, float(delta.sum())


def train_logreg(
    data: Sequence[LabeledVector],
    l2: float = 0.0,
    epochs: int = 200,
    lr: float = 0.1,
    seed: int = 1,
) -> ClassifierModel:
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if lr <= 0:
        raise ValueError("lr must be positive")
    X, y = _as_matrix(data)
    _require_both_classes(y)
    rng = np.random.default_rng(seed)
    w = rng.uniform(-0.01, 0.01, size=X.shape[1])
    b = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, grad_w, grad_b = logreg_loss_and_grads(w, b, X, y, l2)
            if not np.isfinite(loss):
                raise NumericalError(f"training diverged: non-finite loss at epoch {epoch}")
            w -= lr * grad_w
            b -= lr * grad_b
    meta = {"l2": repr(l2), "epochs": str(epochs), "lr": repr(lr), "seed": str(seed)}
    return ClassifierModel(kind="logreg", arrays={"w": w, "b": np.array([b])}, meta=meta)


def train_gnb(data: Sequence[LabeledVector], var_floor: float = 1e-9) -> ClassifierModel:
    """Per-class feature means, floored variances, and log class priors."""
    if var_floor <= 0:
        raise ValueError("var_floor must be positive")
    X, y = _as_matrix(data)
    means = []
    variances = []
    priors = []
    for cls in (0.0, 1.0):
        rows = X[y == cls]
        if rows.shape[0] == 0:
            raise DataError(f"class {int(cls)} has no training examples")
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), var_floor))
        priors.append(rows.shape[0] / X.shape[0])
    arrays = {
        "mean": np.stack(means),
        "var": np.stack(variances),
        "log_prior": np.log(np.asarray(priors)),
    }
    return ClassifierModel(kind="gnb", arrays=arrays, meta={"var_floor": repr(var_floor)})


def _mlp_layers(model: ClassifierModel) -> tuple[list[np.ndarray], list[np.ndarray]]:
    n_layers = len(model.arrays) // 2
    weights = [model.arrays[f"W{i}"] for i in range(n_layers)]
    biases = [model.arrays[f"b{i}"] for i in range(n_layers)]
    return weights, biases


def predict_proba(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    """Probability of class 1 for each row of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DataError(
            f"feature matrix of width {X.shape[-1] if X.ndim else 0} "
            f"does not match model dimension {model.n_features}"
        )
    if model.kind == "mlp":
        weights, biases = _mlp_layers(model)
        _, logits = mlp_forward(weights, biases, X)
        return _sigmoid(logits)
    if model.kind == "logreg":
        return _sigmoid(X @ model.arrays["w"] + model.arrays["b"][0])
    if model.kind == "gnb":
        mean = model.arrays["mean"]
        var = model.arrays["var"]
        # joint log density per class, conditionally independent features
        joint = model.arrays["log_prior"] - 0.5 * (
            np.log(2.0 * np.pi * var).sum(axis=1)
            + (((X[:, None, :] - mean) ** 2) / var).sum(axis=2)
        )
        return np.exp(joint[:, 1] - np.logaddexp(joint[:, 0], joint[:, 1]))
    raise DataError(f"unknown classifier kind {model.kind!r}")


def predict(model: ClassifierModel, features: Sequence[float]) -> tuple[float, int]:
    """(probability of class 1, predicted label); label is 1 iff p >= threshold."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise DataError(
            f"feature vector of length {x.shape[0] if x.ndim == 1 else x.shape} "
            f"does not match model dimension {model.n_features}"
        )
    p = float(predict_proba(model, x[None, :])[0])
    return p, int(p >= model.threshold)


def _ngrams(tokens: Sequence[str], lo: int, hi: int) -> Counter:
    grams: Counter = Counter()
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            grams[" ".join(tokens[i : i + n])] += 1
    return grams


def _top_by_count(counts: Counter, cap: int) -> list[str]:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [name for name, _ in ranked[:cap]]


def bow_features(
    docs: Sequence[Sequence[str]],
    n_range: tuple[int, int] = (1, 5),
    max_features: int = 2000,
    hateful_terms: Sequence[str] = (),
    parses: Sequence[ParseGraph | None] | None = None,
) -> tuple[np.ndarray, list[str]]:
    """Term-frequency matrix over word n-grams, plus dependency-feature
    n-grams when parses are supplied, plus binary hateful-term columns.

    Each n-gram family keeps its max_features most frequent entries, ties
    broken lexicographically.  Returns (matrix, column names).
    """
    if not docs:
        raise DataError("cannot featureize an empty corpus")
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise DataError(f"bad n-gram range ({lo}, {hi})")
    if max_features < 1:
        raise DataError("max_features must be >= 1")

    token_seqs = [list(tokens) for tokens in docs]
    families = [[_ngrams(tokens, lo, hi) for tokens in token_seqs]]
    if parses is not None:
        if len(parses) != len(docs):
            raise DataError("parses are not aligned with documents")
        dep_seqs = [
            [pair.feature() for pair in filter_dependencies(graph)] if graph else []
            for graph in parses
        ]
        families.append([_ngrams(seq, lo, hi) for seq in dep_seqs])

    names: list[str] = []
    columns: list[np.ndarray] = []
    for per_doc in families:
        totals: Counter = Counter()
        for grams in per_doc:
            totals.update(grams)
        kept = _top_by_count(totals, max_features)
        names.extend(kept)
        for name in kept:
            columns.append(np.asarray([grams[name] for grams in per_doc], dtype=np.float64))

    seen: set[str] = set()
    for term in hateful_terms:
        if term in seen:
            continue
        seen.add(term)
        names.append(f"hateful:{term}")
        columns.append(
            np.asarray([float(term in tokens) for tokens in token_seqs], dtype=np.float64)
        )

    if not columns:
        raise DataError("no features extracted (documents shorter than the n-gram range)")
    return np.column_stack(columns), names


def save_classifier(model: ClassifierModel, path: str | Path) -> None:
    """Little-endian binary: magic, version, kind, threshold, named f32 arrays."""
    if model.kind not in _KIND_CODES:
        raise DataError(f"unknown classifier kind {model.kind!r}")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BB", _FORMAT_VERSION, _KIND_CODES[model.kind]))
        fh.write(struct.pack("<d", model.threshold))
        fh.write(struct.pack("<H", len(model.arrays)))
        for name, array in model.arrays.items():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", array.ndim))
            fh.write(struct.pack(f"<{array.ndim}I", *array.shape))
            fh.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def _read_exact(fh, count: int) -> bytes:
    raw = fh.read(count)
    if len(raw) != count:
        raise DataError("classifier file truncated")
    return raw


def load_classifier(path: str | Path) -> ClassifierModel:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != _MAGIC:
            raise DataError(f"{path}: not a classifier file (bad magic)")
        version, kind_code = struct.unpack("<BB", _read_exact(fh, 2))
        if version != _FORMAT_VERSION:
            raise DataError(f"{path}: unsupported classifier version {version}")
        if kind_code not in _CODE_KINDS:
            raise DataError(f"{path}: unknown classifier kind code {kind_code}")
        (threshold,) = struct.unpack("<d", _read_exact(fh, 8))
        (n_arrays,) = struct.unpack("<H", _read_exact(fh, 2))
        arrays: dict[str, np.ndarray] = {}
        for _ in range(n_arrays):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2))
            name = _read_exact(fh, name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(fh, 1))
            shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim))
            count = int(np.prod(shape)) if shape else 1
            flat = np.frombuffer(_read_exact(fh, 4 * count), dtype="<f4")
            arrays[name] = flat.reshape(shape).astype(np.float64)
    return ClassifierModel(kind=_CODE_KINDS[kind_code], arrays=arrays, threshold=threshold)
