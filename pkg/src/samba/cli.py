"""Headless train/apply/features workflows plus the HTTP server launcher.

Exit codes: 0 success, 1 engine error, 2 usage error. Labels are exchanged
as 8-bit class-id PNGs (the same format the UI downloads), so CLI and
browser workflows interoperate without converters.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import forest as forest_mod
from .errors import EngineError, FeatureMismatch
from .features import FeatureConfig, build_feature_stack
from .image_io import GrayImage, decode_class_png, decode_image, encode_png, to_grayscale
from .labels import LabelMap, extract_training_set

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".tif", ".tiff"}


class UsageError(Exception):
    """Bad user input (missing files, mismatched dimensions, bad config)."""


def _read_bytes(path: str, what: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p.read_bytes()


def _load_config(path: str | None) -> FeatureConfig:
    if path is None:
        return FeatureConfig()
    try:
        return FeatureConfig.from_text(_read_bytes(path, "config file").decode("utf-8"))
    except EngineError as e:
        raise UsageError(f"bad config file: {e}") from None


def _load_label_maps(labels_path: str, n_slices: int, width: int, height: int):
    p = Path(labels_path)
    if p.is_dir():
        files = sorted(f for f in p.iterdir() if f.suffix.lower() == ".png")
        if len(files) != n_slices:
            raise UsageError(
                f"labels directory has {len(files)} PNGs but the image has {n_slices} slices"
            )
    elif p.is_file():
        if n_slices != 1:
            raise UsageError("multi-slice image needs a labels directory (one PNG per slice)")
        files = [p]
    else:
        raise UsageError(f"labels not found: {labels_path}")
    maps = []
    for i, f in enumerate(files):
        classes = decode_class_png(f.read_bytes())
        if classes.shape != (height, width):
            raise UsageError(
                f"labels {f.name} are {classes.shape[1]}x{classes.shape[0]}, "
                f"image is {width}x{height}"
            )
        maps.append(LabelMap(width=width, height=height, classes=classes, slice_index=i))
    return maps


def _forest_params(args) -> forest_mod.ForestParams:
    params = forest_mod.ForestParams()
    if args.trees is not None:
        params.n_trees = args.trees
    if args.seed is not None:
        params.seed = args.seed
    return params


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    stack = decode_image(_read_bytes(args.image, "image"))
    maps = _load_label_maps(args.labels, stack.n_slices, stack.width, stack.height)
    feature_stacks = [build_feature_stack(to_grayscale(s), cfg) for s in stack.slices]
    ts = extract_training_set(feature_stacks, maps)
    model = forest_mod.train_forest(ts, _forest_params(args))
    acc = forest_mod.train_accuracy(model, ts)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(forest_mod.serialize_model(model))

    print(f"features: {ts.features.shape[1]}")
    counts = np.bincount(ts.classes)
    for c in range(1, counts.shape[0]):
        if counts[c]:
            print(f"class {c}: {counts[c]} samples")
    print(f"train_accuracy: {acc:.4f}")
    print(f"model written to {out}")
    return 0


def _apply_one(model, cfg, image_path: Path, out_dir: Path) -> None:
    stack = decode_image(image_path.read_bytes())
    stem = image_path.stem
    for k, raster in enumerate(stack.slices):
        fstack = build_feature_stack(to_grayscale(raster), cfg)
        seg = forest_mod.segment(model, fstack)
        suffix = f"_p{k}" if stack.n_slices > 1 else ""
        (out_dir / f"{stem}{suffix}_seg.png").write_bytes(encode_png(seg.class_map))
        unc = GrayImage(
            width=seg.uncertainty.shape[1], height=seg.uncertainty.shape[0], data=seg.uncertainty
        )
        (out_dir / f"{stem}{suffix}_unc.png").write_bytes(encode_png(unc))


def cmd_apply(args) -> int:
    cfg = _load_config(args.config)
    model = forest_mod.deserialize_model(_read_bytes(args.model, "model file"))
    src = Path(args.image)
    if src.is_dir():
        inputs = sorted(f for f in src.iterdir() if f.suffix.lower() in IMAGE_EXTENSIONS)
    elif src.is_file():
        inputs = [src]
    else:
        raise UsageError(f"image path not found: {args.image}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    failed = 0
    for f in inputs:
        try:
            _apply_one(model, cfg, f, out_dir)
        except FeatureMismatch as e:
            print(f"{f.name}: skipped ({e})", file=sys.stderr)
            failed += 1
        except EngineError as e:
            print(f"{f.name}: failed ({type(e).__name__}: {e})", file=sys.stderr)
            failed += 1
    return 1 if failed else 0


def cmd_features(args) -> int:
    cfg = _load_config(args.config)
    stack = decode_image(_read_bytes(args.image, "image"))
    fstack = build_feature_stack(to_grayscale(stack.slices[0]), cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(fstack.names):
        plane = fstack.data[:, :, i]
        lo, hi = plane.min(), plane.max()
        scaled = (plane - lo) / (hi - lo) if hi > lo else np.zeros_like(plane)
        gray = GrayImage(width=fstack.width, height=fstack.height, data=scaled)
        (out_dir / f"{i:03d}_{name}.png").write_bytes(encode_png(gray))
    (out_dir / "feature_names.txt").write_text("\n".join(fstack.names) + "\n")
    print(f"wrote {fstack.n_features} feature images to {out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(max_sessions=args.max_sessions)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="samba", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a classifier from an image + label PNG")
    p_train.add_argument("--image", required=True)
    p_train.add_argument("--labels", required=True, help="class-id PNG (or directory for stacks)")
    p_train.add_argument("--config", default=None, help="feature config file")
    p_train.add_argument("--trees", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--out", required=True, help="output model file")
    p_train.set_defaults(func=cmd_train)

    p_apply = sub.add_parser("apply", help="segment images with a trained classifier")
    p_apply.add_argument("--model", required=True)
    p_apply.add_argument("--image", required=True, help="image file or directory")
    p_apply.add_argument("--config", default=None)
    p_apply.add_argument("--out", required=True, help="output directory")
    p_apply.set_defaults(func=cmd_apply)

    p_feat = sub.add_parser("features", help="dump the feature stack as PNGs")
    p_feat.add_argument("--image", required=True)
    p_feat.add_argument("--config", default=None)
    p_feat.add_argument("--out", required=True, help="output directory")
    p_feat.set_defaults(func=cmd_features)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--max-sessions", type=int, default=32)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except EngineError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
