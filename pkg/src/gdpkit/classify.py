"""Binary linear SVM and a chi-square nearest-prototype baseline."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from . import _backend

MODEL_MAGIC = "GDPKIT-SVM"
MODEL_VERSION = "v1"


class Label(enum.IntEnum):
    POSITIVE = 1  # male
    NEGATIVE = -1  # female

    @property
    def name_text(self) -> str:
        return "male" if self is Label.POSITIVE else "female"

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("male", "positive", "+1", "1"):
                return cls.POSITIVE
            if key in ("female", "negative", "-1"):
                return cls.NEGATIVE
            raise ValueError(f"unknown label {value!r}; expected male or female")
        return cls(int(value))


class DimensionMismatchError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


class ModelMagicError(ModelFormatError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class ModelPayloadError(ModelFormatError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    c: float = 1.0
    epochs: int = 200
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    config: TrainConfig = field(default_factory=TrainConfig)
    epochs_run: int = 0
    initial_objective: float = float("nan")
    final_objective: float = float("nan")
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"feature dimension {X.shape[1]} does not match model dimension {self.dim}"
            )
        return X @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        """Labels as +1/-1 ints; a zero score counts as positive."""
        return np.where(self.decision_function(X) >= 0, 1, -1)


def _as_signs(labels) -> np.ndarray:
    return np.array([int(Label.parse(v)) for v in labels], dtype=np.float64)


def primal_objective(w, b, X, y, c) -> float:
    """``0.5 * (|w|^2 + b^2) + c * sum(hinge)``; the bias is regularised like a weight."""
    margins = y * (X @ w + b)
    return 0.5 * (float(w @ w) + b * b) + c * float(np.maximum(0.0, 1.0 - margins).sum())


def svm_train(features, labels, config: TrainConfig = TrainConfig()) -> LinearSvmModel:
    """Train a soft-margin linear SVM by dual coordinate descent.

    The sample order is reshuffled every epoch from a PCG64 stream seeded by
    ``config.seed``. Training stops once the primal objective changes by
    less than ``tolerance`` (relative) between epochs, when an epoch makes no
    update, or at the epoch cap. The best primal iterate seen is returned,
    so the final objective never exceeds the starting one.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    y = _as_signs(labels)
    n, d = X.shape
    if len(y) != n:
        raise DimensionMismatchError(f"{n} feature rows but {len(y)} labels")
    if n < 2 or len(np.unique(y)) < 2:
        raise ValueError("training needs at least one example of each class")

    # bias folded in as a constant unit feature
    Xa = np.ascontiguousarray(np.hstack([X, np.ones((n, 1))]))
    qii = np.einsum("ij,ij->i", Xa, Xa)
    alpha = np.zeros(n)
    wa = np.zeros(d + 1)
    c = float(config.c)
    rng = np.random.default_rng(config.seed)
    kernels = _backend.kernels

    initial = primal_objective(wa[:-1], 0.0, X, y, c)
    best, best_w = initial, wa.copy()
    prev = initial
    epochs_run = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        before = alpha.copy()
        kernels.dcd_epoch(Xa, y, alpha, wa, qii, order, c)
        epochs_run = epoch + 1
        obj = primal_objective(wa[:-1], wa[-1], X, y, c)
        if obj < best:
            best, best_w = obj, wa.copy()
        if np.array_equal(before, alpha):
            break
        if abs(prev - obj) <= config.tolerance * max(1.0, abs(obj)):
            break
        prev = obj

    return LinearSvmModel(
        weights=best_w[:-1].copy(),
        bias=float(best_w[-1]),
        config=config,
        epochs_run=epochs_run,
        initial_objective=initial,
        final_objective=best,
    )


def svm_predict(model: LinearSvmModel, x) -> Tuple[Label, float]:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.dim:
        raise DimensionMismatchError(
            f"feature dimension {x.shape[0]} does not match model dimension {model.dim}"
        )
    score = float(x @ model.weights + model.bias)
    return (Label.POSITIVE if score >= 0 else Label.NEGATIVE), score


def save_model(model: LinearSvmModel) -> str:
    cfg = model.config
    meta = {
        "c": repr(float(cfg.c)),
        "epochs": str(cfg.epochs),
        "tolerance": repr(float(cfg.tolerance)),
        "seed": str(cfg.seed),
        "epochs_run": str(model.epochs_run),
        "initial_objective": format(model.initial_objective, ".17g"),
        "final_objective": format(model.final_objective, ".17g"),
    }
    meta.update(model.meta)
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"dim={model.dim}",
        f"bias={format(model.bias, '.17g')}",
        " ".join(format(float(v), ".17g") for v in model.weights),
    ]
    lines += [f"meta.{k}={v}" for k, v in meta.items()]
    return "\n".join(lines) + "\n"


def _field(line: str, key: str) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise ModelPayloadError(f"expected '{prefix}...', got {line[:40]!r}")
    return line[len(prefix):]


def load_model(text) -> LinearSvmModel:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    head = lines[0].strip() if lines else ""
    parts = head.split()
    if not parts or parts[0] != MODEL_MAGIC:
        raise ModelMagicError(f"not a model file (first line {head[:40]!r})")
    if len(parts) != 2 or parts[1] != MODEL_VERSION:
        raise ModelVersionError(f"unsupported model version {' '.join(parts[1:])!r}")
    if len(lines) < 4:
        raise ModelPayloadError("model file truncated")
    try:
        dim = int(_field(lines[1], "dim"))
        bias = float(_field(lines[2], "bias"))
        weights = np.array([float(v) for v in lines[3].split()], dtype=np.float64)
    except ValueError as exc:
        if isinstance(exc, ModelPayloadError):
            raise
        raise ModelPayloadError(str(exc)) from None
    if dim < 1 or len(weights) != dim:
        raise ModelPayloadError(f"header declares dim={dim} but {len(weights)} weights found")

    meta = {}
    for line in lines[4:]:
        if not line.strip():
            continue
        if not line.startswith("meta.") or "=" not in line:
            raise ModelPayloadError(f"unexpected line {line[:40]!r}")
        key, value = line[5:].split("=", 1)
        meta[key] = value
    try:
        config = TrainConfig(
            c=float(meta.pop("c", 1.0)),
            epochs=int(meta.pop("epochs", 200)),
            tolerance=float(meta.pop("tolerance", 1e-6)),
            seed=int(meta.pop("seed", 0)),
        )
        epochs_run = int(meta.pop("epochs_run", 0))
        initial = float(meta.pop("initial_objective", "nan"))
        final = float(meta.pop("final_objective", "nan"))
    except ValueError as exc:
        raise ModelPayloadError(f"bad metadata: {exc}") from None
    return LinearSvmModel(weights, bias, config, epochs_run, initial, final, meta)


def chi_square_distance(h1, h2) -> float:
    """Sum of ``(a - b)^2 / (a + b)`` over coordinates; ``0/0`` terms count as 0."""
    a = np.asarray(h1, dtype=np.float64).ravel()
    b = np.asarray(h2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    if (a < 0).any() or (b < 0).any():
        raise ValueError("chi-square distance needs non-negative entries")
    s = a + b
    diff = a - b
    # diff * (diff / s) rather than diff**2 / s: squaring tiny entries underflows to 0
    ratio = np.divide(diff, s, out=np.zeros_like(s), where=s > 0)
    return float((diff * ratio).sum())


@dataclass(frozen=True, eq=False)
class ChiSquarePrototypes:
    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self):
        if np.shape(self.positive) != np.shape(self.negative):
            raise DimensionMismatchError("prototypes differ in dimension")

    @property
    def dim(self) -> int:
        return len(self.positive)


def fit_chi_square_prototypes(features, labels: Sequence) -> ChiSquarePrototypes:
    """Per-class mean feature vectors."""
    X = np.asarray(features, dtype=np.float64)
    y = _as_signs(labels)
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("prototypes need at least one example of each class")
    return ChiSquarePrototypes(X[y > 0].mean(axis=0), X[y < 0].mean(axis=0))


def chi_square_classify(protos: ChiSquarePrototypes, x) -> Label:
    d_pos = chi_square_distance(protos.positive, x)
    d_neg = chi_square_distance(protos.negative, x)
    return Label.POSITIVE if d_pos <= d_neg else Label.NEGATIVE
