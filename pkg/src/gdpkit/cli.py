"""Command-line front end.

Subcommands: synth, extract, train, predict, eval, noise-bench. Any option
can also come from a flat YAML/JSON mapping passed with ``--config``;
command-line flags win over the file.

Exit codes: 0 success, 1 runtime or data error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import _backend
from .classify import (
    DimensionMismatchError,
    Label,
    ModelFormatError,
    TrainConfig,
    load_model,
    save_model,
    svm_train,
)
from .evaluation import (
    CLASSIFIERS,
    DataError,
    Dataset,
    SplitSpec,
    _cross_validate,
    _Classifier,
    accuracies,
    format_manifest,
    load_manifest,
    render_table,
    run_block_size_experiment,
    run_method_comparison,
    run_noise_experiment,
    stratified_kfold,
)
from .features import DescriptorKind, feature_length, feature_matrix
from .imagecore import NoiseSpec, SyntheticSpec, make_synthetic_textures, write_pgm

log = logging.getLogger("gdpkit")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _kind_list(text):
    try:
        return [DescriptorKind.parse(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _kind(text):
    try:
        return DescriptorKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _method_list(text):
    out = []
    for item in str(text).split(","):
        if not item.strip():
            continue
        kind, _, clf = item.partition(":")
        clf = (clf or "svm").strip().lower()
        if clf not in CLASSIFIERS:
            raise argparse.ArgumentTypeError(f"unknown classifier {clf!r} in {item!r}")
        out.append((_kind(kind), clf))
    return out


# option name -> (type, default, help); shared by every subcommand that uses it
OPTIONS = {
    "out": (str, None, "output path"),
    "per_class": (int, 100, "images per class"),
    "size": (int, 64, "image side length in pixels"),
    "period": (int, 8, "grating period in pixels"),
    "jitter": (float, 0.1, "per-pixel jitter amplitude on the unit intensity scale"),
    "seed": (int, 0, "base seed for every random stream"),
    "manifest": (str, None, "manifest CSV (path,label)"),
    "features": (str, None, "feature CSV (label,f1,...,fd)"),
    "model": (str, None, "model file"),
    "kind": (_kind, DescriptorKind.GDP, "descriptor: GDP, LBP or LBP_U"),
    "kinds": (_kind_list, None, "comma-separated descriptors"),
    "n": (int, 9, "blocks per image side"),
    "blocks": (_int_list, [5, 7, 9, 11, 13], "comma-separated blocks-per-side values"),
    "methods": (_method_list, None, "comma-separated KIND:CLASSIFIER pairs, e.g. GDP:svm,LBP:chi2"),
    "classifier": (str, "svm", "svm or chi2"),
    "c": (float, 1.0, "SVM soft-margin penalty"),
    "epochs": (int, 200, "SVM epoch cap"),
    "tolerance": (float, 1e-6, "SVM relative objective-change stopping threshold"),
    "svm_seed": (int, None, "SVM shuffling seed (default: --seed)"),
    "folds": (int, 5, "cross-validation folds"),
    "split_seed": (int, None, "fold assignment seed (default: --seed)"),
    "cv_folds": (int, 0, "also report k-fold CV accuracy when > 1"),
    "noise_mean": (float, 0.0, "noise mean on the unit intensity scale"),
    "noise_var": (float, 0.001, "noise variance on the unit intensity scale"),
    "noise_seed": (int, None, "noise seed (default: --seed)"),
}

COMMANDS = {
    "synth": ("write a synthetic two-class grating corpus",
              ["out", "per_class", "size", "period", "jitter", "seed"]),
    "extract": ("write block-histogram features for a manifest",
                ["manifest", "kind", "n", "out"]),
    "train": ("train a linear SVM",
              ["features", "manifest", "kind", "n", "out", "c", "epochs", "tolerance",
               "seed", "svm_seed", "cv_folds", "split_seed"]),
    "predict": ("score features or images with a trained model",
                ["model", "features", "manifest", "kind", "n", "out"]),
    "eval": ("cross-validated accuracy over block sizes or methods",
             ["manifest", "kinds", "blocks", "methods", "classifier", "folds", "c", "epochs",
              "tolerance", "seed", "svm_seed", "split_seed", "out"]),
    "noise-bench": ("clean vs Gaussian-noise accuracy per descriptor",
                    ["manifest", "kinds", "n", "classifier", "noise_mean", "noise_var",
                     "noise_seed", "folds", "c", "epochs", "tolerance", "seed", "svm_seed",
                     "split_seed", "out"]),
}

REQUIRED = {
    "synth": ["out"],
    "extract": ["manifest", "out"],
    "train": ["out"],
    "predict": ["model", "out"],
    "eval": ["manifest"],
    "noise-bench": ["manifest"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdpkit", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML/JSON file of option values")
        for opt in opts:
            typ, default, h = OPTIONS[opt]
            # defaults are applied after merging the config file
            p.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ,
                           default=argparse.SUPPRESS,
                           help=h + (f" (default: {default})" if default is not None else ""))
    return parser


def _load_config(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML/JSON: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a flat mapping")
    out = {}
    for key, value in data.items():
        opt = str(key).replace("-", "_")
        if opt not in OPTIONS:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)) and opt not in ("blocks", "kinds", "methods"):
            raise UsageError(f"config key {key!r} must be a scalar")
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        typ = OPTIONS[opt][0]
        try:
            out[opt] = typ(value) if value is not None else None
        except (ValueError, TypeError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}")
    return out


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags for the chosen subcommand."""
    cmd = args.command
    opts = {k: OPTIONS[k][1] for k in COMMANDS[cmd][1]}
    cli = {k: v for k, v in vars(args).items() if k in opts}
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        opts.update({k: v for k, v in cfg.items() if k in opts})
    opts.update(cli)
    for seed_key in ("svm_seed", "split_seed", "noise_seed"):
        if seed_key in opts and opts[seed_key] is None:
            opts[seed_key] = opts["seed"]
    missing = [k for k in REQUIRED[cmd] if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    for key in ("n", "per_class", "size", "period"):
        if key in opts and opts[key] < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be >= 1, got {opts[key]}")
    if "blocks" in opts and any(b < 1 for b in opts["blocks"]):
        raise UsageError("--blocks values must be >= 1")
    if opts.get("classifier") not in (None, *CLASSIFIERS):
        raise UsageError(f"--classifier must be one of {', '.join(CLASSIFIERS)}")
    return opts


def _train_config(o) -> TrainConfig:
    return TrainConfig(o["c"], o["epochs"], o["tolerance"], o["svm_seed"])


def _split(o) -> SplitSpec:
    return SplitSpec(o["folds"], o["split_seed"])


def _manifest(path):
    if not Path(path).is_file():
        raise UsageError(f"manifest not found: {path}")
    try:
        return load_manifest(path)
    except ValueError as exc:
        raise UsageError(f"bad manifest {path}: {exc}")


def _write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}")


def format_features(labels, X) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label"] + [f"f{i + 1}" for i in range(X.shape[1])])
    for label, row in zip(labels, X):
        w.writerow([Label.parse(label).name_text] + [format(float(v), ".12g") for v in row])
    return buf.getvalue()


def read_features(path):
    if not Path(path).is_file():
        raise UsageError(f"feature file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise DataError(f"{path}: header must start with 'label'")
        labels, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                labels.append(Label.parse(rec[0]))
                rows.append([float(v) for v in rec[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}")
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 1)
    return labels, X


def cmd_synth(o) -> int:
    try:
        spec = SyntheticSpec(o["per_class"], o["size"], o["period"], o["jitter"], o["seed"])
    except ValueError as exc:
        raise UsageError(str(exc))
    out = Path(o["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        rows = []
        counters = {"A": 0, "B": 0}
        for sample in make_synthetic_textures(spec):
            name = f"{sample.label}_{counters[sample.label]:04d}.pgm"
            counters[sample.label] += 1
            write_pgm(out / name, sample.image)
            rows.append((name, Label.POSITIVE if sample.label == "A" else Label.NEGATIVE))
        (out / "manifest.csv").write_text(format_manifest(rows), encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc}")
    print(f"wrote {len(rows)} images and {out / 'manifest.csv'}")
    return EXIT_OK


def cmd_extract(o) -> int:
    manifest = _manifest(o["manifest"])
    ds = Dataset.from_manifest(manifest)
    X = _features_for(ds, o["kind"], o["n"])
    _write_text(o["out"], format_features(ds.labels, X))
    print(f"wrote {X.shape[0]} rows x {X.shape[1]} features to {o['out']}")
    return EXIT_OK


def _features_for(ds: Dataset, kind, n):
    try:
        return feature_matrix(ds.images, kind, n)
    except ValueError as exc:
        raise DataError(str(exc))


def _training_data(o):
    if (o.get("features") is None) == (o.get("manifest") is None):
        raise UsageError("give exactly one of --features or --manifest")
    if o.get("features") is not None:
        labels, X = read_features(o["features"])
        return labels, X, None, []
    ds = Dataset.from_manifest(_manifest(o["manifest"]))
    return ds.labels, _features_for(ds, o["kind"], o["n"]), o["kind"], ds.names


def cmd_train(o) -> int:
    try:
        config = _train_config(o)
    except ValueError as exc:
        raise UsageError(str(exc))
    labels, X, kind, _ = _training_data(o)
    try:
        model = svm_train(X, labels, config)
    except DimensionMismatchError as exc:
        raise DataError(str(exc))
    except ValueError as exc:
        raise UsageError(str(exc))
    if kind is not None:
        model.meta.update(kind=kind.value, n=str(o["n"]))
    model.meta["backend"] = _backend.NAME
    _write_text(o["out"], save_model(model))
    train_acc = accuracies(model.predict(X), labels).overall
    print(f"model dim={model.dim} epochs={model.epochs_run} "
          f"objective {model.initial_objective:.6g} -> {model.final_objective:.6g} "
          f"train_acc={train_acc:.4f}")
    if o["cv_folds"] > 1:
        try:
            split = SplitSpec(o["cv_folds"], o["split_seed"])
            folds = stratified_kfold(labels, split)
        except ValueError as exc:
            raise UsageError(str(exc))
        y = np.array([int(l) for l in labels])
        pred, _ = _cross_validate(X, y, folds, _Classifier("svm", config))
        print(f"cv_acc={accuracies(pred, y).overall:.4f} ({o['cv_folds']} folds)")
    return EXIT_OK


def cmd_predict(o) -> int:
    try:
        model = load_model(Path(o["model"]).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"model not found: {o['model']}")
    except ModelFormatError as exc:
        raise DataError(f"{o['model']}: {exc}")
    if o.get("manifest") is not None and "kind" in model.meta and "kind" not in o.get("_cli", ()):
        o = dict(o, kind=DescriptorKind.parse(model.meta["kind"]), n=int(model.meta.get("n", o["n"])))
    _, X, _, names = _training_data(o)
    scores = model.decision_function(X)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "path", "label", "score"])
    for i, s in enumerate(scores):
        label = Label.POSITIVE if s >= 0 else Label.NEGATIVE
        w.writerow([i, names[i] if names else "", label.name_text, format(float(s), ".17g")])
    _write_text(o["out"], buf.getvalue())
    print(f"wrote {len(scores)} predictions to {o['out']}")
    return EXIT_OK


def _emit(report, out):
    print(render_table(report), end="")
    if out:
        try:
            report.write(out)
        except OSError as exc:
            raise DataError(f"cannot write {out}: {exc}")
        print(f"report written to {out}")


def cmd_eval(o) -> int:
    try:
        split, config = _split(o), _train_config(o)
    except ValueError as exc:
        raise UsageError(str(exc))
    manifest = _manifest(o["manifest"])
    try:
        stratified_kfold(manifest.labels, split)
    except ValueError as exc:
        raise UsageError(str(exc))
    if o.get("methods"):
        n = o["blocks"][0] if o["blocks"] else 9
        report = run_method_comparison(manifest, o["methods"], n, split, config)
    else:
        kinds = o["kinds"] if o["kinds"] is not None else [DescriptorKind.GDP]
        report = run_block_size_experiment(manifest, kinds, o["blocks"], split, config,
                                           o["classifier"])
    _emit(report, o.get("out"))
    return EXIT_OK


def cmd_noise_bench(o) -> int:
    try:
        split, config = _split(o), _train_config(o)
        noise = NoiseSpec(o["noise_mean"], o["noise_var"], o["noise_seed"])
    except ValueError as exc:
        raise UsageError(str(exc))
    manifest = _manifest(o["manifest"])
    try:
        stratified_kfold(manifest.labels, split)
    except ValueError as exc:
        raise UsageError(str(exc))
    kinds = o["kinds"] if o["kinds"] is not None else [
        DescriptorKind.GDP, DescriptorKind.LBP, DescriptorKind.LBP_U]
    report = run_noise_experiment(manifest, kinds, o["n"], noise, split, config, o["classifier"])
    _emit(report, o.get("out"))
    return EXIT_OK


HANDLERS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "noise-bench": cmd_noise_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args)
        opts["_cli"] = tuple(k for k in vars(args) if k in OPTIONS)
        return HANDLERS[args.command](opts)
    except UsageError as exc:
        print(f"gdpkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DimensionMismatchError, ModelFormatError, OSError) as exc:
        print(f"gdpkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
