"""Command line entry point: synth, ingest, extract, train, eval, identify."""
import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import mlp
from .errors import ThermofaceError
from .minutiae import read_features_csv, write_features_csv
from .pipeline import (PipelineConfig, config_from_mapping, evaluate, extract_dataset,
                       extract_stages, dump_stages, format_report, ingest, read_config_file,
                       read_manifest, write_confusion_csv, write_manifest, write_report_csv)
from .raster import read_pnm
from .synth import SynthParams, synth_faces

log = logging.getLogger("thermoface")


def _size(text):
    w, _, h = text.lower().partition("x")
    return int(w), int(h or w)


def _add_config_flags(p):
    g = p.add_argument_group("pipeline configuration (overrides --config)")
    g.add_argument("--config", type=Path, help="key=value file with any of the options below")
    g.add_argument("--connectivity", type=int, choices=(4, 8))
    g.add_argument("--scale-major", type=float)
    g.add_argument("--scale-minor", type=float)
    g.add_argument("--norm", choices=("L2", "L1"))
    g.add_argument("--threshold", help="'mean' or a percentile of gradient magnitudes")
    g.add_argument("--thinning", dest="thinning", action="store_const", const="true")
    g.add_argument("--no-thinning", dest="thinning", action="store_const", const="false")
    g.add_argument("--block-size", type=int)
    g.add_argument("--block-sizes", help="comma separated, e.g. 8,16,32")
    g.add_argument("--hidden", help="hidden layer widths, e.g. 100,50,10")
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--momentum", type=float)
    g.add_argument("--epochs", type=int)
    g.add_argument("--split-ratio", type=float)
    g.add_argument("--seed", type=int)


def config_from_args(args):
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(PipelineConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = str(v)
    return config_from_mapping(values)


def _manifest(source, cfg):
    source = Path(source)
    if source.is_file():
        return read_manifest(source)
    return ingest(source, cfg.split_ratio, cfg.seed)


def cmd_synth(args):
    params = SynthParams(noise_sigma=args.noise, max_shift=args.max_shift)
    paths = synth_faces(args.root, args.subjects, args.per_subject, _size(args.size),
                        args.seed, params)
    print(f"wrote {len(paths)} images to {args.root}")


def cmd_ingest(args):
    cfg = config_from_args(args)
    manifest = ingest(args.root, cfg.split_ratio, cfg.seed)
    out = args.out or Path(args.root) / "manifest.csv"
    write_manifest(out, manifest)
    n_train = len(manifest.split("train"))
    print(f"{len(manifest.subjects)} subjects, {n_train} train / "
          f"{len(manifest.entries) - n_train} test images -> {out}")


def cmd_extract(args):
    cfg = config_from_args(args)
    manifest = _manifest(args.source, cfg)
    entries = manifest.entries if args.split == "all" else manifest.split(args.split)
    data = extract_dataset(entries, cfg, manifest.image_size)
    X = data.features(cfg.block_size)
    write_features_csv(args.out, [(e.subject, x) for e, x in zip(data.entries, X)])
    if args.debug_dir:
        for e in data.entries:
            st = extract_stages(read_pnm(e.path), cfg)
            dump_stages(st, Path(args.debug_dir) / e.subject / Path(e.path).stem,
                        figure=args.figures)
    for path, exc in data.failures:
        print(f"skipped {path}: {exc}", file=sys.stderr)
    print(f"{len(data.entries)} feature vectors of length {X.shape[1] if X.size else 0} -> {args.out}")


def classes_path(model_path):
    model_path = Path(model_path)
    return model_path.with_name(model_path.name + ".classes")


def cmd_train(args):
    cfg = config_from_args(args)
    labels, X = read_features_csv(args.features)
    if not labels:
        raise ThermofaceError(f"{args.features} holds no samples")
    classes = sorted(set(labels))
    index = {c: k for k, c in enumerate(classes)}
    y = np.array([index[c] for c in labels])
    model = mlp.new_network([X.shape[1], *cfg.hidden, len(classes)], cfg.seed)
    model = mlp.train(model, X, y, cfg.train_config())
    mlp.save_model(model, args.out)
    classes_path(args.out).write_text("\n".join(classes) + "\n")
    print(f"trained {len(classes)}-class model on {len(labels)} samples, "
          f"final loss {model.loss_history[-1]:.6g}, training accuracy "
          f"{100 * mlp.accuracy(model, X, y):.2f}% -> {args.out}")


def cmd_eval(args):
    from .plotting import plot_block_rates, plot_confusion, plot_loss

    cfg = config_from_args(args)
    manifest = _manifest(args.source, cfg)
    report = evaluate(manifest, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = format_report(report)
    (out / "report.txt").write_text(text)
    write_report_csv(out / "report.csv", report)
    for r in report.results:
        mlp.save_model(r.model, out / f"model_{r.block_size}.bin")
        classes_path(out / f"model_{r.block_size}.bin").write_text("\n".join(report.classes) + "\n")
        write_confusion_csv(out / f"confusion_{r.block_size}.csv", r, report.classes)
        if args.figures:
            plot_confusion(r, report.classes, out / f"confusion_{r.block_size}.png")
            plot_loss(r.model.loss_history, out / f"loss_{r.block_size}.png",
                      label=f"block {r.block_size}")
    if args.figures:
        plot_block_rates(report, out / "rates.png")
    # wall-clock numbers live apart from the reproducible report
    (out / "timing.txt").write_text(
        "".join(f"{k}={v:.3f}\n" for k, v in report.timings.items()))
    sys.stdout.write(text)


def cmd_identify(args):
    cfg = config_from_args(args)
    model = mlp.load_model(args.model)
    cpath = classes_path(args.model)
    classes = cpath.read_text().split() if cpath.exists() else [str(k) for k in range(model.d_out)]
    st = extract_stages(read_pnm(args.image), cfg)
    h, w = st.gray.shape
    from .minutiae import block_features
    fv = block_features(st.minutiae, w, h, cfg.block_size)
    if fv.counts.size != model.d_in:
        raise ThermofaceError(
            f"block size {cfg.block_size} gives {fv.counts.size} features but the model "
            f"expects {model.d_in}; pass the block size used for training")
    out = mlp.forward(model, fv.counts.astype(np.float64))
    k = int(mlp.predict(model, fv.counts.astype(np.float64)))
    if args.debug_dir:
        dump_stages(st, args.debug_dir, figure=args.figures)
    print(classes[k])
    if args.verbose:
        for name, v in zip(classes, out):
            print(f"  {name}: {v:+.4f}", file=sys.stderr)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="thermoface", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic thermal face corpus")
    p.add_argument("root", type=Path)
    p.add_argument("--subjects", type=int, default=7)
    p.add_argument("--per-subject", type=int, default=34)
    p.add_argument("--size", default="128x128", help="WIDTHxHEIGHT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=SynthParams.noise_sigma)
    p.add_argument("--max-shift", type=int, default=SynthParams.max_shift)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="scan root/<subject>/*.pgm|ppm into a manifest CSV")
    p.add_argument("root", type=Path)
    p.add_argument("--out", type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", parents=[common], help="images -> block feature CSV")
    p.add_argument("source", type=Path, help="dataset root or manifest CSV")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="all")
    p.add_argument("--debug-dir", type=Path, help="dump every stage of every image here")
    p.add_argument("--figures", action="store_true", help="also render stage panels (PNG)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="feature CSV -> model file")
    p.add_argument("features", type=Path)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="full block-size sweep -> report")
    p.add_argument("source", type=Path, help="dataset root or manifest CSV")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--no-figures", dest="figures", action="store_false")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("identify", parents=[common], help="model + one image -> subject label")
    p.add_argument("model", type=Path)
    p.add_argument("image", type=Path)
    p.add_argument("--debug-dir", type=Path)
    p.add_argument("--figures", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_identify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ThermofaceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
