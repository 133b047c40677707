"""End-to-end orchestration: dataset -> model -> prediction log -> reports.

All report writers use sorted JSON keys and repr() float formatting, so
two runs with the same seed produce byte-identical bundles.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import confusion, netgraph, ttest
from .classifier import (ModelParams, TrainConfig, init_model, load_model,
                         load_model_metadata, predict_batch, save_model, train)
from .dataset import ChannelStats, LabeledImage, compute_channel_stats, normalize_image
from .intervention import export_sweep_csv, sweep
from .planted import PlantedDataset, load_planted_dataset
from .records import ClassificationRecord, save_prediction_log


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


@dataclass
class RunConfig:
    dataset_dir: Path                 # planted dataset directory (bins + manifest)
    out_dir: Path
    model_path: Optional[Path] = None  # train from scratch when absent
    seed: int = 0
    epochs: int = 12
    learning_rate: float = 0.01
    batch_size: int = 256
    theta: float = 0.3
    top_p: float = 0.05
    box_width: int = 7
    box_height: int = 7
    df_rule: str = "paper"
    category_map_path: Optional[Path] = None
    extra_logs: tuple = ()            # prediction logs from other models
    model_id: str = "builtin"
    control_cap: int = 200
    ratio_mode: str = "ratio"


def normalize_batch(images, stats: ChannelStats) -> np.ndarray:
    return np.stack([normalize_image(img.image, stats) for img in images])


def classify_images(params: ModelParams, stats: ChannelStats, images,
                    model_id: str = "builtin"):
    """ClassificationRecords for a list of LabeledImages."""
    if not images:
        return []
    x = normalize_batch(images, stats)
    labels, probs = predict_batch(params, x)
    return [
        ClassificationRecord(img.id, img.label, int(lab),
                             tuple(float(s) for s in row), model_id)
        for img, lab, row in zip(images, labels, probs)
    ]


def train_on_planted(ds: PlantedDataset, seed: int, epochs: int,
                     learning_rate: float = 0.01, batch_size: int = 256):
    stats = compute_channel_stats(ds.train)
    data = [(normalize_image(img.image, stats), img.label) for img in ds.train]
    params = init_model(seed, ds.cfg.num_classes)
    cfg = TrainConfig(learning_rate=learning_rate, batch_size=batch_size,
                      epochs=epochs, seed=seed)
    params, trace = train(params, data, cfg)
    return params, stats, trace


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "loss", "accuracy"])
        for row in trace:
            w.writerow([row["epoch"], repr(row["loss"]), repr(row["accuracy"])])


def _ratio_samples_from_planted(records, ds: PlantedDataset, mode: str):
    """Group misclassified-image score ratios by the planted ground truth:
    interference-flagged images vs the rest."""
    buckets = {confusion.INTERFERENCE: [], confusion.MORPHOLOGY: []}
    for r in records:
        if not r.misclassified:
            continue
        info = ds.info.get(r.image_id)
        s_true, s_pred = r.scores[r.true_label], r.scores[r.predicted_label]
        value = s_true / s_pred if mode == "ratio" else s_true - s_pred
        key = confusion.INTERFERENCE if (info and info.interference) \
            else confusion.MORPHOLOGY
        buckets[key].append(value)
    return {k: confusion.ScoreRatioSample(k, tuple(v)) for k, v in buckets.items()}


def run_pipeline(cfg: RunConfig) -> dict:
    """Run every stage and write the report bundle; returns artifact paths."""
    out = Path(cfg.out_dir)
    artifacts = {}

    try:
        ds = load_planted_dataset(cfg.dataset_dir)
    except Exception as exc:
        raise StageError("load-dataset", exc) from exc

    out.mkdir(parents=True, exist_ok=True)

    try:
        if cfg.model_path is not None:
            params = load_model(cfg.model_path)
            meta = load_model_metadata(cfg.model_path)
            stats = ChannelStats(mean=np.array(meta["channel_mean"]),
                                 std=np.array(meta["channel_std"]))
            trace = []
        else:
            params, stats, trace = train_on_planted(
                ds, cfg.seed, cfg.epochs, cfg.learning_rate, cfg.batch_size)
            save_model(params, out / "model.bin", metadata={
                "channel_mean": list(stats.mean), "channel_std": list(stats.std),
                "seed": cfg.seed, "epochs": cfg.epochs,
                "learning_rate": cfg.learning_rate, "batch_size": cfg.batch_size,
            })
            artifacts["model"] = out / "model.bin"
        if trace:
            write_trace_csv(trace, out / "trace.csv")
            artifacts["trace"] = out / "trace.csv"
    except StageError:
        raise
    except Exception as exc:
        raise StageError("train", exc) from exc

    try:
        records = classify_images(params, stats, ds.test, cfg.model_id)
        save_prediction_log(records, out / "predictions.jsonl")
        artifacts["predictions"] = out / "predictions.jsonl"
    except Exception as exc:
        raise StageError("predict", exc) from exc

    try:
        counts = confusion.tally(records)
        u, u_def = confusion.misclass_rates(counts)
        v, v_def = confusion.conditional_rates(counts)
        confusion.export_u_csv(u, u_def, out / "u.csv")
        confusion.export_v_csv(v, v_def, out / "v.csv")
        artifacts["u"] = out / "u.csv"
        artifacts["v"] = out / "v.csv"
    except Exception as exc:
        raise StageError("stats", exc) from exc

    try:
        network = netgraph.build_network(v, cfg.theta, model_id=cfg.model_id)
        (out / "network.dot").write_text(netgraph.export_dot(network))
        netgraph.write_network_json(network, out / "network.json")
        artifacts["network_dot"] = out / "network.dot"
        artifacts["network_json"] = out / "network.json"
    except Exception as exc:
        raise StageError("network", exc) from exc

    try:
        logs = [records]
        from .records import load_prediction_log
        for path in cfg.extra_logs:
            logs.append(load_prediction_log(path))
        if len(logs) >= 2:
            tables = [confusion.tally(lg).misclassified_totals for lg in logs]
            result = confusion.chi_squared_homogeneity(tables)
            confusion.write_homogeneity_report(result, out / "homogeneity.json")
            artifacts["homogeneity"] = out / "homogeneity.json"
    except Exception as exc:
        raise StageError("homogeneity", exc) from exc

    try:
        if cfg.category_map_path is not None:
            with open(cfg.category_map_path) as fh:
                cat_map = confusion.parse_category_map(json.load(fh))
            samples = confusion.score_ratios(records, cat_map, mode=cfg.ratio_mode)
        else:
            samples = _ratio_samples_from_planted(records, ds, cfg.ratio_mode)
        confusion.export_ratio_csv(samples, out / "score_ratios.csv")
        artifacts["score_ratios"] = out / "score_ratios.csv"
        s1 = samples.get(confusion.MORPHOLOGY)
        s2 = samples.get(confusion.INTERFERENCE)
        if s1 and s2 and len(s1.values) >= 2 and len(s2.values) >= 2:
            result = ttest.two_sample_t_test(s1.values, s2.values, df_rule=cfg.df_rule)
            ttest.write_report(result, out / "ttest.json")
            artifacts["ttest"] = out / "ttest.json"
    except Exception as exc:
        raise StageError("ttest", exc) from exc

    try:
        by_id = {img.id: img for img in ds.test}
        misclassified = [by_id[r.image_id] for r in records if r.misclassified]
        controls = [by_id[r.image_id] for r in records
                    if not r.misclassified][:cfg.control_cap]
        spare_masks = {img_id: info.object_mask for img_id, info in ds.info.items()}
        rows = sweep(params, stats, misclassified, controls,
                     [cfg.top_p], [cfg.box_width], [cfg.box_height],
                     spare_masks=spare_masks, model_id=cfg.model_id)
        export_sweep_csv(rows, out / "sweep.csv")
        artifacts["sweep"] = out / "sweep.csv"
    except Exception as exc:
        raise StageError("sweep", exc) from exc

    return artifacts
