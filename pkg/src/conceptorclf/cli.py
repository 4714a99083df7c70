"""Command-line front end: ``conceptorclf {synth,train,classify,eval,morph,inspect}``.

Settings come from built-in defaults, then an optional JSON ``--config`` file,
then command-line flags. The fully resolved settings are echoed into every
file a command writes. Exit codes: 0 success, 1 usage, 2 data error,
3 numerical failure. Errors are printed to stderr as a single line
``conceptorclf: error[<kind>]: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .classifier import TrainingConfig, classify, morph, train
from .conceptor import quota
from .dataio import Dataset, atomic_write_text, format_float, load_manifest, read_manifest, split, write_dataset
from .evaluation import confusion, emit_report
from .exceptions import ConceptorError, DataError, ModelFileError, NumericalError
from .persistence import load_model, read_provenance, save_model
from .reservoir import spectral_radius
from .synthetic import PRESETS, SynthSpec, preset, synth_generate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    reservoir_size: int = 100
    spectral_radius: float = 0.9
    input_scale: float = 0.2
    bias_scale: float = 0.2
    connectivity: float = 0.1
    aperture: float = 10.0
    washout: int = 10
    normalize: bool = True
    data: Optional[str] = None
    model: Optional[str] = None
    out: Optional[str] = None
    spec: Optional[str] = None
    preset: Optional[str] = None
    train_counts: Optional[str] = None
    predictions: Optional[str] = None
    truth: Optional[str] = None
    report_dir: Optional[str] = None
    label_a: Optional[str] = None
    label_b: Optional[str] = None
    weight: Optional[float] = None

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            n_neurons=self.reservoir_size,
            spectral_radius=self.spectral_radius,
            input_scale=self.input_scale,
            bias_scale=self.bias_scale,
            connectivity=self.connectivity,
            seed=self.seed,
            washout=self.washout,
            aperture=self.aperture,
            normalize=self.normalize,
        )

    def echo(self, command):
        return {"command": command, **asdict(self)}

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            raise UsageError(f"missing required setting(s): {flags}")


_FIELDS = {f.name: f for f in fields(RunConfig)}


def load_config_file(path):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must contain a JSON object")
    out = {}
    for key, value in raw.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise UsageError(f"unknown config key {key!r} in {path}")
        out[name] = value
    return out


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**values)
    if not 0 <= int(cfg.seed) < 2**64:
        raise UsageError(f"--seed must be an unsigned 64-bit integer, got {cfg.seed}")
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _fail("usage", message)
        raise SystemExit(EXIT_USAGE)


def _fail(kind, message):
    text = " ".join(str(message).split())
    print(f"conceptorclf: error[{kind}]: {text}", file=sys.stderr)


def _warn(message):
    print(f"conceptorclf: warning: {message}", file=sys.stderr)


def _parse_counts(text):
    counts = {}
    for part in text.split(","):
        label, sep, n = part.partition("=")
        if not sep or not n.strip().isdigit():
            raise UsageError(f"--train-counts expects label=N[,label=N...], got {text!r}")
        counts[label.strip()] = int(n)
    return counts


def _comment(cfg, command):
    return "# config: " + json.dumps(cfg.echo(command), sort_keys=True) + "\n"


# -- commands --------------------------------------------------------------


def cmd_synth(cfg: RunConfig):
    cfg.require("out")
    if (cfg.spec is None) == (cfg.preset is None):
        raise UsageError("synth needs exactly one of --spec or --preset")
    if cfg.spec is not None:
        try:
            spec = SynthSpec.from_dict(json.loads(Path(cfg.spec).read_text(encoding="utf-8")))
        except OSError as exc:
            raise DataError(f"cannot read spec {cfg.spec}: {exc.strerror}") from exc
        except (json.JSONDecodeError, TypeError, KeyError, ValueError) as exc:
            raise DataError(f"invalid synthetic spec {cfg.spec}: {exc}") from exc
    else:
        spec = preset(cfg.preset)
    dataset = synth_generate(spec, cfg.seed)
    out = Path(cfg.out)
    manifest = write_dataset(dataset, out)
    atomic_write_text(out / "synth_spec.json", json.dumps(
        {"config": cfg.echo("synth"), "spec": spec.to_dict()}, sort_keys=True, indent=1) + "\n")
    print(f"wrote {len(dataset)} clips and {manifest}")
    if cfg.train_counts:
        train_set, test_set = split(dataset, _parse_counts(cfg.train_counts), cfg.seed)
        for name, part in (("train_manifest.csv", train_set), ("test_manifest.csv", test_set)):
            lines = "".join(f"{s.clip_id},{s.label},{s.clip_id}.csv\n" for s in part)
            atomic_write_text(out / name, lines)
        print(f"split: {len(train_set)} training clips, {len(test_set)} test clips")
    return EXIT_OK


def cmd_train(cfg: RunConfig):
    cfg.require("data", "out")
    dataset = load_manifest(cfg.data)
    model = train(dataset, cfg.training_config())
    save_model(model, cfg.out, provenance=cfg.echo("train"))
    pairs = [(s.label, classify(model, s)[0]) for s in dataset if s.n_frames > cfg.washout]
    cm = confusion(pairs, model.labels)
    report_dir = Path(cfg.report_dir) if cfg.report_dir else Path(cfg.out).parent
    emit_report(cm, report_dir, stem="train_report", title="training set", provenance=cfg.echo("train"))
    print(f"trained {len(model.labels)} conceptors on {len(dataset)} clips; training accuracy {cm.accuracy:.4f}")
    for label in model.labels:
        print(f"  quota[{label}] = {quota(model.conceptor(label)):.4f}")
    return EXIT_OK


def predictions_text(model, dataset: Dataset, header_comment=""):
    buf = io.StringIO()
    buf.write(header_comment)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["clip_id", "predicted", *model.labels])
    for s in dataset:
        label, evidence = classify(model, s)
        writer.writerow([s.clip_id, label, *(format_float(v) for v in evidence.values)])
    return buf.getvalue()


def cmd_classify(cfg: RunConfig):
    cfg.require("model", "data", "out")
    model = load_model(cfg.model)
    dataset = load_manifest(cfg.data)
    if len(dataset) == 0:
        _warn(f"manifest {cfg.data} lists no clips; writing header only")
    atomic_write_text(cfg.out, predictions_text(model, dataset, _comment(cfg, "classify")))
    print(f"classified {len(dataset)} clips -> {cfg.out}")
    return EXIT_OK


def read_predictions(path):
    """Return ``(labels, [(clip_id, predicted), ...])`` from a predictions CSV."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read predictions {path}: {exc.strerror}") from exc
    rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#")) if r]
    if not rows or rows[0][:2] != ["clip_id", "predicted"]:
        raise DataError(f"{path}: expected header 'clip_id,predicted,<labels...>'")
    labels = rows[0][2:]
    return labels, [(r[0], r[1]) for r in rows[1:]]


def cmd_eval(cfg: RunConfig):
    cfg.require("predictions", "truth", "out")
    labels, preds = read_predictions(cfg.predictions)
    truth = {clip_id: label for clip_id, label, _ in read_manifest(cfg.truth)}
    pairs = []
    for clip_id, predicted in preds:
        if clip_id not in truth:
            raise DataError(f"clip {clip_id!r} has a prediction but no entry in {cfg.truth}")
        pairs.append((truth[clip_id], predicted))
    cm = confusion(pairs, labels or None)
    emit_report(cm, cfg.out, stem="report", title="evaluation", provenance=cfg.echo("eval"))
    print(f"accuracy {cm.accuracy:.4f} over {cm.total} clips")
    for label in cm.labels:
        r = cm.recall(label)
        print(f"  recall[{label}] = {'undefined' if r is None else f'{r:.4f}'}")
    return EXIT_OK


def cmd_morph(cfg: RunConfig):
    cfg.require("model", "label_a", "label_b", "weight", "out")
    model = load_model(cfg.model)
    try:
        morphed = morph(model, cfg.label_a, cfg.label_b, cfg.weight)
    except KeyError as exc:
        raise DataError(exc.args[0]) from exc
    provenance = {"source": read_provenance(cfg.model), **cfg.echo("morph")}
    save_model(morphed, cfg.out, provenance=provenance)
    print(f"added conceptor {morphed.labels} -> {cfg.out}")
    return EXIT_OK


def cmd_inspect(cfg: RunConfig):
    cfg.require("model")
    model = load_model(cfg.model)
    summary = {
        "format_version": model.format_version,
        "labels": list(model.labels),
        "n_neurons": model.reservoir.n_neurons,
        "n_channels": model.n_channels,
        "channel_names": list(model.channel_names),
        "spectral_radius": spectral_radius(model.reservoir.W),
        "config": model.config.to_dict(),
        "quota": {c.label: quota(c) for c in model.conceptors},
        "provenance": read_provenance(cfg.model),
    }
    print(json.dumps(summary, sort_keys=True, indent=1))
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "morph": cmd_morph,
    "inspect": cmd_inspect,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON file with settings; flags override it")
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--reservoir-size", type=int, metavar="N")
    common.add_argument("--spectral-radius", type=float, metavar="F")
    common.add_argument("--input-scale", type=float, metavar="F")
    common.add_argument("--bias-scale", type=float, metavar="F")
    common.add_argument("--connectivity", type=float, metavar="F")
    common.add_argument("--aperture", type=float, metavar="F")
    common.add_argument("--washout", type=int, metavar="N")
    common.add_argument("--out", metavar="PATH")

    parser = _Parser(prog="conceptorclf", description="Conceptor-based time-series classification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic pose dataset")
    p.add_argument("--spec", metavar="PATH", help="JSON synthetic spec")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--train-counts", metavar="LABEL=N,...", help="also write train/test manifests")

    p = sub.add_parser("train", parents=[common], help="learn one conceptor per class")
    p.add_argument("--data", metavar="MANIFEST")
    p.add_argument("--report-dir", metavar="DIR")

    p = sub.add_parser("classify", parents=[common], help="classify clips with a trained model")
    p.add_argument("--model", metavar="PATH")
    p.add_argument("--data", metavar="MANIFEST")

    p = sub.add_parser("eval", parents=[common], help="score predictions against a manifest")
    p.add_argument("--predictions", metavar="PATH")
    p.add_argument("--truth", metavar="MANIFEST")

    p = sub.add_parser("morph", parents=[common], help="add a convex combination of two conceptors")
    p.add_argument("--model", metavar="PATH")
    p.add_argument("--label-a")
    p.add_argument("--label-b")
    p.add_argument("--weight", type=float, help="coefficient on --label-a, in [0, 1]")

    p = sub.add_parser("inspect", parents=[common], help="summarize a model file")
    p.add_argument("--model", metavar="PATH")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail("numeric", exc)
        return EXIT_NUMERIC
    except (DataError, ModelFileError, ConceptorError, FileNotFoundError) as exc:
        _fail("data", exc)
        return EXIT_DATA
    except OSError as exc:
        _fail("data", f"{exc.filename or ''}: {exc.strerror}")
        return EXIT_DATA
    except (TypeError, ValueError) as exc:
        _fail("usage", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
