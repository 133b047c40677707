"""Classification records and the JSONL prediction-log format.

One record per line: {"image_id": str, "true_label": int,
"predicted_label": int, "scores": [C floats], "model_id": str}.
Logs written by external training runs can be ingested as long as they
follow this schema and keep predicted_label consistent with argmax.
"""

import json
from dataclasses import dataclass


class PredictionLogError(ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def argmax_lowest(scores) -> int:
    """Index of the largest score, lowest index on ties."""
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


@dataclass(frozen=True)
class ClassificationRecord:
    image_id: str
    true_label: int
    predicted_label: int
    scores: tuple
    model_id: str

    def __post_init__(self):
        c = len(self.scores)
        if not (0 <= self.true_label < c):
            raise ValueError(f"true_label {self.true_label} out of range for {c} classes")
        if not (0 <= self.predicted_label < c):
            raise ValueError(f"predicted_label {self.predicted_label} out of range for {c} classes")
        if self.predicted_label != argmax_lowest(self.scores):
            raise ValueError(
                f"predicted_label {self.predicted_label} is not the argmax of scores "
                f"for image {self.image_id}")

    @property
    def misclassified(self) -> bool:
        return self.predicted_label != self.true_label


def save_prediction_log(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({
                "image_id": r.image_id,
                "true_label": r.true_label,
                "predicted_label": r.predicted_label,
                "scores": list(r.scores),
                "model_id": r.model_id,
            }) + "\n")


def load_prediction_log(path, expected_classes=None):
    records = []
    num_classes = expected_classes
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PredictionLogError(f"malformed JSON: {exc}", lineno) from exc
            try:
                scores = tuple(float(s) for s in obj["scores"])
                record = ClassificationRecord(
                    image_id=str(obj["image_id"]),
                    true_label=int(obj["true_label"]),
                    predicted_label=int(obj["predicted_label"]),
                    scores=scores,
                    model_id=str(obj["model_id"]),
                )
            except KeyError as exc:
                raise PredictionLogError(f"missing field {exc}", lineno) from exc
            except (TypeError, ValueError) as exc:
                raise PredictionLogError(str(exc), lineno) from exc
            if num_classes is None:
                num_classes = len(scores)
            elif len(scores) != num_classes:
                raise PredictionLogError(
                    f"expected {num_classes} scores, got {len(scores)}", lineno)
            records.append(record)
    return records
