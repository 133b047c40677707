"""Command-line interface."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import confusion, netgraph, ttest
from .classifier import (TrainConfig, init_model, load_model, load_model_metadata,
                         save_model, train)
from .dataset import ChannelStats, compute_channel_stats, normalize_image
from .intervention import (InterventionSpec, do_intervention, export_sweep_csv,
                           result_to_json, sweep)
from .pipeline import RunConfig, StageError, classify_images, run_pipeline, write_trace_csv
from .planted import (PlantedConfig, generate_planted_dataset, load_planted_dataset,
                      rle_to_mask, save_planted_dataset)
from .records import load_prediction_log, save_prediction_log
from .saliency import (OcclusionConfig, export_saliency_csv, export_saliency_png,
                       gradient_saliency, model_scorer, occlusion_saliency)


def _load_session(model_path, dataset_dir):
    params = load_model(model_path)
    meta = load_model_metadata(model_path)
    stats = ChannelStats(mean=np.array(meta["channel_mean"]),
                         std=np.array(meta["channel_std"]))
    ds = load_planted_dataset(dataset_dir)
    return params, stats, ds


def _find_image(ds, image_id):
    for img in ds.train + ds.test:
        if img.id == image_id:
            return img
    raise SystemExit(f"error: image id {image_id!r} not found in dataset")


def _spare_mask(ds, image_id, option):
    if option in (None, "none"):
        return None
    if option == "ground-truth":
        info = ds.info.get(image_id)
        return info.object_mask if info else None
    with open(option) as fh:
        return rle_to_mask(json.load(fh)["runs"])


def cmd_gen_planted(args):
    cfg = PlantedConfig(
        num_classes=args.num_classes, train_size=args.train_size,
        test_size=args.test_size, correlation=args.correlation,
        patched_fraction=args.patched_fraction,
        test_interference_fraction=args.interference_fraction,
        noise_amplitude=args.noise, glyph_intensity=args.glyph_intensity,
        patch_size=args.patch_size, patch_corner=args.patch_corner)
    ds = generate_planted_dataset(cfg, args.seed)
    save_planted_dataset(ds, args.out)
    print(f"wrote {len(ds.train)} train / {len(ds.test)} test images to {args.out}")


def cmd_train(args):
    ds = load_planted_dataset(args.dataset)
    stats = compute_channel_stats(ds.train, epsilon=args.stats_epsilon)
    data = [(normalize_image(img.image, stats), img.label) for img in ds.train]
    params = init_model(args.seed, ds.cfg.num_classes)
    cfg = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                      epochs=args.epochs, seed=args.seed, shuffle=not args.no_shuffle)
    params, trace = train(params, data, cfg)
    save_model(params, args.out, metadata={
        "channel_mean": list(stats.mean), "channel_std": list(stats.std),
        "seed": args.seed, "epochs": args.epochs, "learning_rate": args.lr,
        "batch_size": args.batch_size,
    })
    if args.trace:
        write_trace_csv(trace, args.trace)
    final = trace[-1] if trace else {"loss": float("nan"), "accuracy": float("nan")}
    print(f"trained {args.epochs} epochs: loss={final['loss']:.4f} "
          f"accuracy={final['accuracy']:.4f} -> {args.out}")


def cmd_predict(args):
    params, stats, ds = _load_session(args.model, args.dataset)
    images = ds.train if args.split == "train" else ds.test
    records = classify_images(params, stats, images, model_id=args.model_id)
    save_prediction_log(records, args.out)
    correct = sum(1 for r in records if not r.misclassified)
    print(f"{correct}/{len(records)} correct -> {args.out}")


def cmd_analyze(args):
    cfg = RunConfig(
        dataset_dir=Path(args.dataset), out_dir=Path(args.out),
        model_path=Path(args.model) if args.model else None,
        seed=args.seed, epochs=args.epochs, learning_rate=args.lr,
        batch_size=args.batch_size, theta=args.theta, top_p=args.top_p,
        box_width=args.dx, box_height=args.dy, df_rule=args.df_rule,
        category_map_path=Path(args.category_map) if args.category_map else None,
        extra_logs=tuple(args.extra_log or ()))
    try:
        artifacts = run_pipeline(cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(1)
    for name, path in sorted(artifacts.items()):
        print(f"{name}: {path}")


def cmd_network(args):
    records = load_prediction_log(args.log)
    counts = confusion.tally(records)
    v, _ = confusion.conditional_rates(counts)
    network = netgraph.build_network(v, args.theta, model_id=args.model_id)
    Path(args.dot).write_text(netgraph.export_dot(network))
    if args.json:
        netgraph.write_network_json(network, args.json)
    d = netgraph.in_degrees(network)
    pairs, _ = netgraph.symmetric_pairs(network)
    print(f"{len(network.edges)} edges, {len(pairs)} symmetric pairs, "
          f"max in-degree {d.max():.3f} -> {args.dot}")


def cmd_homogeneity(args):
    tables = [confusion.tally(load_prediction_log(p)).misclassified_totals
              for p in args.logs]
    result = confusion.chi_squared_homogeneity(tables)
    confusion.write_homogeneity_report(result, args.out)
    print(f"chi2={result.statistic:.4f} df={result.degrees_of_freedom} "
          f"p={result.p_value:.6g} -> {args.out}")


def cmd_ttest(args):
    records = load_prediction_log(args.log)
    if args.category_map:
        with open(args.category_map) as fh:
            cat_map = confusion.parse_category_map(json.load(fh))
    else:
        cat_map = confusion.DEFAULT_CATEGORY_MAP
    samples = confusion.score_ratios(records, cat_map, mode=args.mode)
    s1 = samples.get(confusion.MORPHOLOGY)
    s2 = samples.get(confusion.INTERFERENCE)
    if not s1 or not s2 or len(s1.values) < 2 or len(s2.values) < 2:
        raise SystemExit("error: need >= 2 values in each category for the t-test")
    result = ttest.two_sample_t_test(s1.values, s2.values, df_rule=args.df_rule)
    ttest.write_report(result, args.out)
    print(f"t={result.t_statistic:.4f} df={result.degrees_of_freedom} "
          f"p={result.p_value:.6g} -> {args.out}")


def cmd_saliency(args):
    params, stats, ds = _load_session(args.model, args.dataset)
    img = _find_image(ds, args.id)
    if args.method == "gradient":
        smap = gradient_saliency(params, normalize_image(img.image, stats))
    else:
        smap = occlusion_saliency(model_scorer(params), img.image, stats,
                                  OcclusionConfig(patch_size=args.patch_size,
                                                  stride=args.stride))
    if args.csv:
        export_saliency_csv(smap, args.csv)
    if args.png:
        export_saliency_png(smap, args.png)
    print(f"{args.method} saliency for {args.id}: target={smap.target_class} "
          f"max={smap.values.max():.6g}")


def cmd_intervene(args):
    params, stats, ds = _load_session(args.model, args.dataset)
    img = _find_image(ds, args.id)
    spec = InterventionSpec(top_p=args.top_p, box_width=args.dx, box_height=args.dy,
                            spare_mask=_spare_mask(ds, args.id, args.spare))
    result = do_intervention(params, stats, img, spec, model_id=args.model_id)
    text = result_to_json(result)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args):
    params, stats, ds = _load_session(args.model, args.dataset)
    records = classify_images(params, stats, ds.test, model_id=args.model_id)
    by_id = {img.id: img for img in ds.test}
    misclassified = [by_id[r.image_id] for r in records if r.misclassified]
    controls = [by_id[r.image_id] for r in records if not r.misclassified][:args.controls]
    spare = {i: info.object_mask for i, info in ds.info.items()} \
        if args.spare == "ground-truth" else {}
    rows = sweep(params, stats, misclassified, controls,
                 args.top_p, args.dx, args.dy, spare_masks=spare,
                 model_id=args.model_id)
    export_sweep_csv(rows, args.out)
    print(f"{len(rows)} grid cells over {len(misclassified)} misclassified "
          f"+ {len(controls)} controls -> {args.out}")


def cmd_serve(args):
    import uvicorn
    from .server import create_app
    app = create_app(args.model, args.dataset, theta=args.theta)
    uvicorn.run(app, host=args.host, port=args.port)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="misdiag",
        description="Diagnose image-classifier misclassifications and test "
                    "saliency-anchored erasure interventions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-planted", help="generate a planted-interference dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-classes", type=int, default=3)
    p.add_argument("--train-size", type=int, default=600)
    p.add_argument("--test-size", type=int, default=300)
    p.add_argument("--correlation", type=float, default=1.0)
    p.add_argument("--patched-fraction", type=float, default=1.0)
    p.add_argument("--interference-fraction", type=float, default=0.5)
    p.add_argument("--noise", type=int, default=20)
    p.add_argument("--glyph-intensity", type=int, default=160)
    p.add_argument("--patch-size", type=int, default=6)
    p.add_argument("--patch-corner", default="tl", choices=("tl", "tr", "bl", "br"))
    p.set_defaults(func=cmd_gen_planted)

    p = sub.add_parser("train", help="train the built-in model on a planted dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--stats-epsilon", type=float, default=0.0,
                   help="floor for degenerate (constant) channel stds")
    p.add_argument("--trace", help="write per-epoch loss/accuracy CSV here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify a dataset split into a JSONL log")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--out", required=True)
    p.add_argument("--model-id", default="builtin")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("analyze", help="run the full pipeline and write the report bundle")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", help="reuse a trained model instead of training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--top-p", type=float, default=0.05)
    p.add_argument("--dx", type=int, default=7)
    p.add_argument("--dy", type=int, default=7)
    p.add_argument("--df-rule", default="paper", choices=("paper", "standard"))
    p.add_argument("--category-map", help="JSON {\"i->j\": category} pair map")
    p.add_argument("--extra-log", action="append",
                   help="prediction log of another model (repeatable)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("network", help="build the misclassification network from a log")
    p.add_argument("--log", required=True)
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--dot", required=True)
    p.add_argument("--json")
    p.add_argument("--model-id", default="")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("homogeneity", help="chi-squared homogeneity across model logs")
    p.add_argument("--out", required=True)
    p.add_argument("logs", nargs="+")
    p.set_defaults(func=cmd_homogeneity)

    p = sub.add_parser("ttest", help="two-sample t-test on per-category score ratios")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category-map")
    p.add_argument("--mode", default="ratio", choices=("ratio", "difference"))
    p.add_argument("--df-rule", default="paper", choices=("paper", "standard"))
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("saliency", help="export a saliency map for one image")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--method", default="gradient", choices=("gradient", "occlusion"))
    p.add_argument("--patch-size", type=int, default=3)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--png")
    p.set_defaults(func=cmd_saliency)

    p = sub.add_parser("intervene", help="erase saliency-anchored boxes and reclassify")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--top-p", type=float, default=0.05)
    p.add_argument("--dx", type=int, default=7)
    p.add_argument("--dy", type=int, default=7)
    p.add_argument("--spare", default="none",
                   help="'none', 'ground-truth', or a {\"runs\": [[start, len]...]} JSON file")
    p.add_argument("--model-id", default="builtin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_intervene)

    p = sub.add_parser("sweep", help="grid sweep of intervention hyperparameters")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top-p", type=float, nargs="+", default=[0.05])
    p.add_argument("--dx", type=int, nargs="+", default=[7])
    p.add_argument("--dy", type=int, nargs="+", default=[7])
    p.add_argument("--spare", default="ground-truth", choices=("none", "ground-truth"))
    p.add_argument("--controls", type=int, default=200)
    p.add_argument("--model-id", default="builtin")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="HTTP service backing the explorer UI")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)


if __name__ == "__main__":
    main()
