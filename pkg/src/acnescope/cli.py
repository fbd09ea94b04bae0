"""Batch command line: ``acnescope <command> [options]``.

Exit status is 0 on success, 1 when any image or file fails to process and
2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .classify import VARIANTS, LabeledSet, load_model, predict, save_model, train
from .config import ConfigError, PipelineConfig, load_config
from .dataset import (
    Manifest,
    ManifestError,
    augment,
    augmented_name,
    generate_synthetic_benchmark,
    load_manifest,
    source_of,
    write_manifest,
)
from .evaluate import cross_validate, holdout_evaluate, write_roc_points
from .features import read_feature_table, write_feature_table
from .imaging import ImageFormatError, load_image, save_gray, save_image
from .pipeline import analyze, extract_corpus
from .segment import mask_overlay, mask_to_gray

log = logging.getLogger("acnescope")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _global_options(parser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="flat key = value configuration file")
    parser.add_argument("--seed", type=int, default=default, help="seed for every stochastic stage")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker processes (results do not depend on it)")
    parser.add_argument("--output-dir", default=default, help="directory for written artifacts")
    parser.add_argument("--overlays", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="extract: also write lesion masks and overlays")
    parser.add_argument("--all-classifiers", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="evaluate: run all five classifiers")
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acnescope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="write the synthetic texture benchmark")
    p.add_argument("--n-per-class", type=int, default=60)

    p = sub.add_parser("augment", parents=[common], help="expand a manifest with augmented copies")
    p.add_argument("manifest")

    p = sub.add_parser("extract", parents=[common], help="feature table from a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="feature table path (default: OUTPUT_DIR/features.csv)")

    p = sub.add_parser("train", parents=[common], help="fit one classifier on a feature table")
    p.add_argument("features")
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--out", help="model path (default: OUTPUT_DIR/model_<VARIANT>.txkm)")

    p = sub.add_parser("evaluate", parents=[common], help="run the configured protocol")
    p.add_argument("features")
    p.add_argument("--variant", choices=VARIANTS, default="RF")

    p = sub.add_parser("predict", parents=[common], help="classify one image")
    p.add_argument("model")
    p.add_argument("image")
    return parser


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def _outdir(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _labeled_set(table_path):
    rows = read_feature_table(table_path)
    if not rows:
        raise ValueError(f"{table_path}: feature table has no rows")
    names = []
    for _, label, _ in rows:
        if label not in names:
            names.append(label)
    index = {n: i for i, n in enumerate(names)}
    data = LabeledSet([fv.as_array() for _, _, fv in rows], [index[l] for _, l, _ in rows], names)
    groups = [source_of(p) for p, _, _ in rows]
    return data, groups


def _inside(rel) -> Path:
    """``rel`` with any root and parent references dropped, so it stays under an output dir."""
    parts = [p for p in Path(rel).parts if p not in ("..", ".") and p != Path(rel).anchor]
    return Path(*parts)


def cmd_synth(args, cfg) -> int:
    out = _outdir(cfg)
    _, manifest = generate_synthetic_benchmark(args.n_per_class, cfg.seed, out)
    print(f"wrote {len(manifest)} images and {out / 'manifest.csv'}")
    return EXIT_OK


def cmd_augment(args, cfg) -> int:
    manifest = load_manifest(args.manifest)
    out = _outdir(cfg)
    entries, failed = [], 0
    for rel, label in manifest.entries:
        try:
            variants = augment(load_image(manifest.resolve(rel)), cfg.augment)
        except (OSError, ImageFormatError) as exc:
            log.error("%s: %s", rel, exc)
            failed += 1
            continue
        for i, img in enumerate(variants):
            name = rel if i == 0 else augmented_name(rel, i)
            name = _inside(name).with_suffix(".ppm").as_posix()
            target = out / name
            target.parent.mkdir(parents=True, exist_ok=True)
            save_image(img, target)
            entries.append((name, label))
    write_manifest(Manifest(tuple(entries), out, manifest.class_names), out / "manifest.csv")
    print(f"wrote {len(entries)} images and {out / 'manifest.csv'}")
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_extract(args, cfg) -> int:
    manifest = load_manifest(args.manifest)
    out = _outdir(cfg)
    paths = [manifest.resolve(p) for p in manifest.paths]
    results = extract_corpus(paths, cfg, args.jobs)
    rows, failed = [], 0
    for (rel, label), (fv, err) in zip(manifest.entries, results):
        if err is not None:
            log.error("%s: %s", rel, err)
            failed += 1
            continue
        rows.append((rel, label, fv))
    table = Path(args.out) if args.out else out / "features.csv"
    write_feature_table(table, rows)
    if args.overlays:
        odir = out / "overlays"
        for rel, _, _ in rows:
            img = load_image(manifest.resolve(rel))
            _, seg = analyze(img, cfg)
            stem = odir / _inside(rel).with_suffix("")
            stem.parent.mkdir(parents=True, exist_ok=True)
            save_gray(mask_to_gray(seg.lesion_mask), f"{stem}_mask.pgm")
            save_image(mask_overlay(img, seg.lesion_mask), f"{stem}_overlay.ppm")
    print(f"wrote {len(rows)} rows to {table}" + (f" ({failed} failed)" if failed else ""))
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_train(args, cfg) -> int:
    data, _ = _labeled_set(args.features)
    model = train(args.variant, data, cfg.train, jobs=args.jobs)
    path = Path(args.out) if args.out else _outdir(cfg) / f"model_{args.variant}.txkm"
    save_model(model, path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    data, groups = _labeled_set(args.features)
    out = _outdir(cfg)
    variants = VARIANTS if args.all_classifiers else (args.variant,)
    for v in variants:
        if cfg.protocol == "kfold":
            report = cross_validate(v, data, cfg.k, cfg.train, cfg.seed, groups=groups, jobs=args.jobs)
        else:
            report = holdout_evaluate(v, data, cfg.fraction, cfg.train, cfg.seed, groups=groups,
                                      jobs=args.jobs)
        (out / f"report_{v}.json").write_text(report.to_json() + "\n", encoding="utf-8")
        write_roc_points(report, out / f"roc_{v}.csv")
        print(f"{v}: accuracy {report.accuracy:.2f}%  macro AUC {report.macro_auc:.4f}")
    return EXIT_OK


def cmd_predict(args, cfg) -> int:
    model = load_model(args.model)
    fv, _ = analyze(load_image(args.image), cfg)
    label, scores = predict(model, fv)
    print(model.class_names[label])
    for name, s in zip(model.class_names, scores):
        print(f"{name}\t{float(s):.6f}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "augment": cmd_augment,
    "extract": cmd_extract,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"acnescope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, ManifestError, ImageFormatError) as exc:
        print(f"acnescope: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
