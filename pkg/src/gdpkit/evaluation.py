"""Manifests, stratified k-fold cross-validation and the experiment runners.

Three experiment shapes are provided: a block-size sweep (accuracy against
grid size), a method comparison (any mix of descriptors and classifiers at a
fixed grid) and a noise benchmark (trained on clean images, scored on clean
and on noise-injected test copies).
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from . import _backend
from .classify import (
    Label,
    TrainConfig,
    chi_square_classify,
    fit_chi_square_prototypes,
    svm_train,
)
from .features import DescriptorKind, feature_length, feature_matrix
from .imagecore import RNG_ALGORITHM, GrayImage, NoiseSpec, PgmError, add_gaussian_noise, read_pgm

REPORT_COLUMNS = (
    "config", "kind", "n", "feature_len", "acc_overall", "acc_male", "acc_female", "noise", "seed",
)
CLASSIFIERS = ("svm", "chi2")


class DataError(RuntimeError):
    """Raised when dataset files are missing or unreadable."""


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple  # of (path, Label)

    def __post_init__(self):
        entries = tuple((str(p), Label.parse(l)) for p, l in self.entries)
        paths = [p for p, _ in entries]
        if any(not p for p in paths):
            raise ValueError("manifest contains an empty path")
        if len(set(paths)) != len(paths):
            dup = sorted({p for p in paths if paths.count(p) > 1})
            raise ValueError(f"manifest contains duplicate paths: {', '.join(dup[:5])}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self) -> List[str]:
        return [p for p, _ in self.entries]

    @property
    def labels(self) -> List[Label]:
        return [l for _, l in self.entries]


def parse_manifest(text: str, base_dir=None) -> DatasetManifest:
    """Parse a ``path,label`` CSV; relative paths resolve against ``base_dir``."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["path", "label"]:
        raise ValueError("manifest header must be 'path,label'")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        path = (row["path"] or "").strip()
        label = (row["label"] or "").strip().lower()
        if label not in ("male", "female"):
            raise ValueError(f"line {lineno}: label must be male or female, got {row['label']!r}")
        if base_dir is not None and path and not Path(path).is_absolute():
            path = str(Path(base_dir) / path)
        entries.append((path, Label.parse(label)))
    return DatasetManifest(tuple(entries))


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    return parse_manifest(path.read_text(encoding="utf-8"), base_dir=path.parent)


def format_manifest(rows) -> str:
    """CSV text for ``(path, label)`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "label"])
    for path, label in rows:
        w.writerow([path, Label.parse(label).name_text])
    return buf.getvalue()


@dataclass
class Dataset:
    """Loaded images with labels, in manifest order."""

    images: List[GrayImage]
    labels: List[Label]
    names: List[str]

    @classmethod
    def from_manifest(cls, manifest: DatasetManifest) -> "Dataset":
        images, failed = [], []
        for path in manifest.paths:
            try:
                images.append(read_pgm(path))
            except (OSError, PgmError) as exc:
                failed.append(f"{path} ({exc.__class__.__name__}: {exc})")
        if failed:
            raise DataError("unreadable images: " + "; ".join(failed))
        return cls(images, manifest.labels, manifest.paths)


@dataclass(frozen=True)
class SplitSpec:
    k: int = 5
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"fold count must be >= 2, got {self.k}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def stratified_kfold(labels, spec: SplitSpec) -> List[np.ndarray]:
    """Partition item indices into ``spec.k`` folds.

    Each class is shuffled and dealt round-robin, continuing from the fold
    where the previous class stopped, so both per-class and total fold sizes
    differ by at most one.
    """
    if isinstance(labels, DatasetManifest):
        labels = labels.labels
    y = np.array([int(Label.parse(v)) for v in labels])
    rng = np.random.default_rng(spec.seed)
    groups = [np.flatnonzero(y == c) for c in (1, -1)] if spec.stratified else [np.arange(len(y))]
    groups = [g for g in groups if len(g)]
    smallest = min((len(g) for g in groups), default=0)
    if spec.k > smallest:
        raise ValueError(f"{spec.k} folds requested but the smallest class has {smallest} items")
    folds: List[list] = [[] for _ in range(spec.k)]
    slot = 0
    for g in groups:
        for idx in rng.permutation(g):
            folds[slot].append(int(idx))
            slot = (slot + 1) % spec.k
    return [np.array(sorted(f), dtype=np.intp) for f in folds]


@dataclass(frozen=True)
class Accuracy:
    overall: float
    male: float
    female: float


def accuracies(predicted, actual) -> Accuracy:
    p = np.array([int(Label.parse(v)) for v in predicted])
    a = np.array([int(Label.parse(v)) for v in actual])
    if len(p) != len(a):
        raise ValueError(f"{len(p)} predictions for {len(a)} labels")
    if len(a) == 0:
        raise ValueError("accuracy of an empty labelling is undefined")
    hit = p == a

    def rate(mask):
        return float(hit[mask].mean()) if mask.any() else float("nan")

    return Accuracy(float(hit.mean()), rate(a == 1), rate(a == -1))


@dataclass(frozen=True)
class ReportRow:
    config: str
    kind: str
    n: int
    feature_len: int
    acc_overall: float
    acc_male: float
    acc_female: float
    noise: int
    seed: str

    def __post_init__(self):
        for v in (self.acc_overall, self.acc_male, self.acc_female):
            if not (math.isnan(v) or 0.0 <= v <= 1.0):
                raise ValueError(f"accuracy {v} outside [0, 1]")


@dataclass
class ExperimentReport:
    title: str
    rows: List[ReportRow] = field(default_factory=list)
    metadata: Dict[str, object] = field(default_factory=dict)

    def row(self, config: str) -> ReportRow:
        for r in self.rows:
            if r.config == config:
                return r
        raise KeyError(config)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            d = asdict(r)
            w.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in REPORT_COLUMNS])
        return buf.getvalue()

    def write(self, path) -> None:
        """Write the CSV plus a ``.meta.json`` sidecar holding the metadata."""
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        meta = dict(self.metadata, title=self.title)
        path.with_suffix(".meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def read_report_csv(text: str) -> List[ReportRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(ReportRow(
            config=rec["config"], kind=rec["kind"], n=int(rec["n"]),
            feature_len=int(rec["feature_len"]), acc_overall=float(rec["acc_overall"]),
            acc_male=float(rec["acc_male"]), acc_female=float(rec["acc_female"]),
            noise=int(rec["noise"]), seed=rec["seed"],
        ))
    return rows


def _pct(v: float) -> str:
    return "n/a" if math.isnan(v) else f"{100 * v:.2f}%"


def render_table(report: ExperimentReport) -> str:
    """Plain-text table with percentages to two decimals."""
    if report.metadata.get("experiment") == "noise":
        header = ("Method", "No noise", "With white noise")
        clean = {(r.kind, r.n): r for r in report.rows if not r.noise}
        noisy = {(r.kind, r.n): r for r in report.rows if r.noise}
        body = [
            (f"{k}", _pct(clean[(k, n)].acc_overall), _pct(noisy[(k, n)].acc_overall))
            for (k, n) in clean
            if (k, n) in noisy
        ]
    else:
        header = ("Configuration", "Blocks", "Feature Length", "Overall", "Male", "Female")
        body = [
            (r.config, f"{r.n}x{r.n}", str(r.feature_len), _pct(r.acc_overall),
             _pct(r.acc_male), _pct(r.acc_female))
            for r in report.rows
        ]
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [report.title, fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in body]
    lines = [line.rstrip() for line in lines]
    return "\n".join(lines) + "\n"


def _as_dataset(data: Union[DatasetManifest, Dataset]) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset.from_manifest(data)


def _environment() -> Dict[str, object]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "kernel_backend": _backend.NAME,
        "rng_algorithm": RNG_ALGORITHM,
    }


def _seed_text(split: SplitSpec, train: TrainConfig, noise: Optional[NoiseSpec] = None) -> str:
    s = f"split={split.seed};svm={train.seed}"
    return s + (f";noise={noise.seed}" if noise is not None else "")


class _Classifier:
    def __init__(self, name: str, config: TrainConfig):
        if name not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {name!r}; choose from {', '.join(CLASSIFIERS)}")
        self.name, self.config = name, config

    def fit_predict(self, X_train, y_train, tests):
        if self.name == "svm":
            model = svm_train(X_train, y_train, self.config)
            return [model.predict(T) for T in tests]
        protos = fit_chi_square_prototypes(X_train, y_train)
        return [np.array([int(chi_square_classify(protos, x)) for x in T]) for T in tests]


def _cross_validate(X, y, folds, clf: _Classifier, X_alt=None):
    """Pooled out-of-fold predictions, optionally also for an alternate test matrix."""
    pred = np.zeros(len(y), dtype=int)
    pred_alt = np.zeros(len(y), dtype=int) if X_alt is not None else None
    all_idx = np.arange(len(y))
    for test in folds:
        train = np.setdiff1d(all_idx, test)
        tests = [X[test]] + ([X_alt[test]] if X_alt is not None else [])
        out = clf.fit_predict(X[train], y[train], tests)
        pred[test] = out[0]
        if X_alt is not None:
            pred_alt[test] = out[1]
    return pred, pred_alt


def _config_id(kind: DescriptorKind, n: int, classifier: str) -> str:
    return f"{kind.value}+{classifier.upper()}/n{n}"


def run_block_size_experiment(
    data: Union[DatasetManifest, Dataset],
    kinds: Sequence = (DescriptorKind.GDP,),
    n_list: Sequence[int] = (5, 7, 9, 11, 13),
    split: SplitSpec = SplitSpec(),
    train_config: TrainConfig = TrainConfig(),
    classifier: str = "svm",
) -> ExperimentReport:
    """Cross-validated accuracy for every (descriptor, grid size) pair."""
    kinds = [DescriptorKind.parse(k) for k in kinds]
    clf = _Classifier(classifier, train_config)
    report = ExperimentReport(
        "Classification accuracy by block grid",
        metadata={
            "experiment": "block_size",
            "classifier": classifier,
            "split": asdict(split),
            "train_config": asdict(train_config),
            **_environment(),
        },
    )
    if not kinds or not n_list:
        return report
    ds = _as_dataset(data)
    y = np.array([int(l) for l in ds.labels])
    folds = stratified_kfold(ds.labels, split)
    for kind in kinds:
        for n in n_list:
            X = feature_matrix(ds.images, kind, n)
            pred, _ = _cross_validate(X, y, folds, clf)
            acc = accuracies(pred, y)
            report.rows.append(ReportRow(
                _config_id(kind, n, classifier), kind.value, n, feature_length(kind, n),
                acc.overall, acc.male, acc.female, 0, _seed_text(split, train_config),
            ))
    return report


def run_method_comparison(
    data: Union[DatasetManifest, Dataset],
    methods: Sequence = (("GDP", "svm"), ("LBP", "chi2"), ("LBP", "svm"), ("LBP_U", "svm")),
    n: int = 9,
    split: SplitSpec = SplitSpec(),
    train_config: TrainConfig = TrainConfig(),
) -> ExperimentReport:
    """Accuracy of (descriptor, classifier) pairs on one grid size."""
    report = ExperimentReport(
        "Classification accuracy by method",
        metadata={
            "experiment": "methods",
            "methods": [f"{DescriptorKind.parse(k).value}+{c}" for k, c in methods],
            "split": asdict(split),
            "train_config": asdict(train_config),
            **_environment(),
        },
    )
    if not methods:
        return report
    ds = _as_dataset(data)
    y = np.array([int(l) for l in ds.labels])
    folds = stratified_kfold(ds.labels, split)
    cache = {}
    for kind, classifier in methods:
        kind = DescriptorKind.parse(kind)
        if kind not in cache:
            cache[kind] = feature_matrix(ds.images, kind, n)
        pred, _ = _cross_validate(cache[kind], y, folds, _Classifier(classifier, train_config))
        acc = accuracies(pred, y)
        report.rows.append(ReportRow(
            _config_id(kind, n, classifier), kind.value, n, feature_length(kind, n),
            acc.overall, acc.male, acc.female, 0, _seed_text(split, train_config),
        ))
    return report


def noise_seed(base: int, index: int) -> int:
    """Per-image noise seed derived from the run seed and the image's position."""
    return int(np.random.SeedSequence([base, index]).generate_state(1, np.uint64)[0])


def noisy_copies(images: Sequence[GrayImage], noise: NoiseSpec) -> List[GrayImage]:
    return [
        add_gaussian_noise(img, NoiseSpec(noise.mean, noise.variance, noise_seed(noise.seed, i)))
        for i, img in enumerate(images)
    ]


def run_noise_experiment(
    data: Union[DatasetManifest, Dataset],
    kinds: Sequence = (DescriptorKind.GDP, DescriptorKind.LBP, DescriptorKind.LBP_U),
    n: int = 9,
    noise: NoiseSpec = NoiseSpec(0.0, 0.001, 0),
    split: SplitSpec = SplitSpec(),
    train_config: TrainConfig = TrainConfig(),
    classifier: str = "svm",
) -> ExperimentReport:
    """Train on clean images; score each fold on clean and noisy test copies."""
    kinds = [DescriptorKind.parse(k) for k in kinds]
    clf = _Classifier(classifier, train_config)
    report = ExperimentReport(
        "Accuracy with and without Gaussian noise",
        metadata={
            "experiment": "noise",
            "classifier": classifier,
            "noise": asdict(noise),
            "noise_protocol": "train clean; test on clean and noisy copies",
            "split": asdict(split),
            "train_config": asdict(train_config),
            **_environment(),
        },
    )
    if not kinds:
        return report
    ds = _as_dataset(data)
    y = np.array([int(l) for l in ds.labels])
    folds = stratified_kfold(ds.labels, split)
    noisy = noisy_copies(ds.images, noise)
    seed = _seed_text(split, train_config, noise)
    for kind in kinds:
        X = feature_matrix(ds.images, kind, n)
        Xn = feature_matrix(noisy, kind, n)
        pred, pred_noisy = _cross_validate(X, y, folds, clf, X_alt=Xn)
        base = _config_id(kind, n, classifier)
        for flag, p in ((0, pred), (1, pred_noisy)):
            acc = accuracies(p, y)
            report.rows.append(ReportRow(
                f"{base}/{'noisy' if flag else 'clean'}", kind.value, n, feature_length(kind, n),
                acc.overall, acc.male, acc.female, flag, seed,
            ))
    return report


def accuracy_drop(report: ExperimentReport, kind) -> float:
    """Clean minus noisy overall accuracy for one descriptor in a noise report."""
    kind = DescriptorKind.parse(kind).value
    clean = [r for r in report.rows if r.kind == kind and not r.noise]
    noisy = [r for r in report.rows if r.kind == kind and r.noise]
    if len(clean) != 1 or len(noisy) != 1:
        raise KeyError(f"report has no unique clean/noisy pair for {kind}")
    return clean[0].acc_overall - noisy[0].acc_overall
