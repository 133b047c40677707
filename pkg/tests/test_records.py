import json

import numpy as np
import pytest

from misdiag.records import (ClassificationRecord, PredictionLogError, argmax_lowest,
                             load_prediction_log, save_prediction_log)


def random_records(n, c, seed, model_id="m0"):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        logits = rng.normal(size=c)
        scores = np.exp(logits) / np.exp(logits).sum()
        records.append(ClassificationRecord(
            image_id=f"img#{i}",
            true_label=int(rng.integers(0, c)),
            predicted_label=int(np.argmax(scores)),
            scores=tuple(float(s) for s in scores),
            model_id=model_id,
        ))
    return records


def test_argmax_lowest_tie_break():
    assert argmax_lowest([0.5, 0.5]) == 0
    assert argmax_lowest([0.1, 0.7, 0.7]) == 1
    assert argmax_lowest([1.0]) == 0


def test_record_rejects_inconsistent_argmax():
    with pytest.raises(ValueError, match="argmax"):
        ClassificationRecord("a", 0, 0, (0.1, 0.9), "m")


def test_record_rejects_out_of_range_labels():
    with pytest.raises(ValueError):
        ClassificationRecord("a", 5, 1, (0.1, 0.9), "m")


def test_round_trip(tmp_path):
    records = random_records(1000, 10, seed=0)
    path = tmp_path / "log.jsonl"
    save_prediction_log(records, path)
    assert load_prediction_log(path) == records


def test_malformed_line_reports_number(tmp_path):
    path = tmp_path / "log.jsonl"
    save_prediction_log(random_records(3, 4, seed=1), path)
    with open(path, "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(PredictionLogError, match="line 4"):
        load_prediction_log(path)


def test_wrong_score_count_for_expected_classes(tmp_path):
    path = tmp_path / "log.jsonl"
    save_prediction_log(random_records(1, 9, seed=2), path)
    with pytest.raises(PredictionLogError, match="line 1"):
        load_prediction_log(path, expected_classes=10)


def test_mixed_score_counts(tmp_path):
    path = tmp_path / "log.jsonl"
    save_prediction_log(random_records(2, 10, seed=3), path)
    with open(path, "a") as fh:
        fh.write(json.dumps({"image_id": "x", "true_label": 0, "predicted_label": 0,
                             "scores": [1.0] + [0.0] * 8, "model_id": "m"}) + "\n")
    with pytest.raises(PredictionLogError, match="line 3"):
        load_prediction_log(path)


def test_argmax_consistency_on_load(tmp_path):
    path = tmp_path / "log.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"image_id": "x", "true_label": 0, "predicted_label": 0,
                             "scores": [0.2, 0.8], "model_id": "m"}) + "\n")
    with pytest.raises(PredictionLogError, match="argmax"):
        load_prediction_log(path)
