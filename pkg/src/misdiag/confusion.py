"""Confusion tallies, misclassification rates, homogeneity test, score ratios."""

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .special import chi2_sf

# CIFAR-10 class order.
CIFAR10_CLASSES = ("plane", "car", "bird", "cat", "deer", "dog",
                   "frog", "horse", "ship", "truck")

MORPHOLOGY = "morphology"
INTERFERENCE = "interference"

# Default misclassification-cause categories for the CIFAR-10 classes:
# the symmetric cat<->dog and car<->truck pairs are treated as look-alike
# (morphology) errors; frog->cat and ship->plane as background-driven
# (interference) errors. The map is an input everywhere it is consumed.
DEFAULT_CATEGORY_MAP = {
    (3, 5): MORPHOLOGY, (5, 3): MORPHOLOGY,
    (1, 9): MORPHOLOGY, (9, 1): MORPHOLOGY,
    (6, 3): INTERFERENCE,
    (8, 0): INTERFERENCE,
}


@dataclass(frozen=True)
class ConfusionCounts:
    counts: np.ndarray  # C x C int64, counts[i][j] = true i predicted j

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"counts must be square, got shape {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def class_totals(self) -> np.ndarray:
        """n_i: number of images per true class."""
        return self.counts.sum(axis=1)

    @property
    def misclassified_totals(self) -> np.ndarray:
        """Number of images per true class predicted as any other class."""
        return self.class_totals - np.diag(self.counts)


@dataclass(frozen=True)
class RateTable:
    u: np.ndarray              # class-wise misclassification rates
    u_defined: np.ndarray      # False where n_i == 0
    v: np.ndarray              # C x C conditional rates, zero diagonal
    v_defined: np.ndarray      # False for rows with no misclassifications
    num_classes: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "num_classes", len(self.u))


@dataclass(frozen=True)
class HomogeneityResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float
    dropped_columns: tuple = ()


@dataclass(frozen=True)
class ScoreRatioSample:
    category: str
    values: tuple


def tally(records) -> ConfusionCounts:
    if not records:
        raise ValueError("cannot tally an empty record list: class count unknown")
    c = len(records[0].scores)
    counts = np.zeros((c, c), dtype=np.int64)
    for r in records:
        if len(r.scores) != c:
            raise ValueError(
                f"mixed class counts: expected {c} scores, image {r.image_id} has "
                f"{len(r.scores)}")
        counts[r.true_label, r.predicted_label] += 1
    return ConfusionCounts(counts)


def misclass_rates(counts: ConfusionCounts):
    """u_i = misclassified_i / n_i; entries with n_i == 0 flagged undefined."""
    n = counts.class_totals.astype(np.float64)
    defined = n > 0
    u = np.zeros(counts.num_classes)
    u[defined] = counts.misclassified_totals[defined] / n[defined]
    return u, defined


def conditional_rates(counts: ConfusionCounts):
    """v_{j|i} rows; rows with zero misclassifications stored all-zero, flagged."""
    c = counts.num_classes
    off = counts.counts.astype(np.float64).copy()
    np.fill_diagonal(off, 0.0)
    totals = counts.misclassified_totals.astype(np.float64)
    defined = totals > 0
    v = np.zeros((c, c))
    v[defined] = off[defined] / totals[defined, None]
    return v, defined


def rate_table(counts: ConfusionCounts) -> RateTable:
    u, u_def = misclass_rates(counts)
    v, v_def = conditional_rates(counts)
    return RateTable(u=u, u_defined=u_def, v=v, v_defined=v_def)


def chi_squared_homogeneity(tables) -> HomogeneityResult:
    """Pearson chi-squared on an M x C contingency table of per-class
    misclassified counts, one row per model."""
    obs = np.asarray(tables, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 2:
        raise ValueError("need at least 2 count vectors of equal length")
    if (obs < 0).any():
        raise ValueError("counts must be nonnegative")
    col_totals = obs.sum(axis=0)
    dropped = tuple(int(j) for j in np.flatnonzero(col_totals == 0))
    if dropped:
        warnings.warn(f"dropping all-zero class columns {dropped} from homogeneity test")
        obs = obs[:, col_totals > 0]
    if obs.shape[1] < 2 or obs.sum() == 0:
        raise ValueError("contingency table too small after dropping empty columns")
    row = obs.sum(axis=1, keepdims=True)
    col = obs.sum(axis=0, keepdims=True)
    expected = row @ col / obs.sum()
    stat = float(((obs - expected) ** 2 / expected).sum())
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    p = chi2_sf(stat, df) if stat > 0 else 1.0
    return HomogeneityResult(stat, df, min(max(p, 0.0), 1.0), dropped)


def score_ratios(records, category_map=None, mode="ratio"):
    """Per-category samples of correct/misclassified score ratios (or
    differences) over the misclassified records whose (true -> predicted)
    pair appears in category_map."""
    if category_map is None:
        category_map = DEFAULT_CATEGORY_MAP
    if mode not in ("ratio", "difference"):
        raise ValueError(f"mode must be 'ratio' or 'difference', got {mode!r}")
    buckets = {}
    for r in records:
        if not r.misclassified:
            continue
        category = category_map.get((r.true_label, r.predicted_label))
        if category is None:
            continue
        s_true = r.scores[r.true_label]
        s_pred = r.scores[r.predicted_label]
        if mode == "ratio":
            if s_pred == 0:
                raise ValueError(
                    f"image {r.image_id}: predicted-class score is 0 despite argmax")
            value = s_true / s_pred
        else:
            value = s_true - s_pred
        buckets.setdefault(category, []).append(value)
    return {cat: ScoreRatioSample(cat, tuple(vals)) for cat, vals in buckets.items()}


def parse_category_map(obj):
    """Parse {"i->j": "morphology"|"interference"} into a pair-keyed dict."""
    out = {}
    for key, category in obj.items():
        i, j = key.split("->")
        if category not in (MORPHOLOGY, INTERFERENCE):
            raise ValueError(f"unknown category {category!r} for pair {key}")
        out[(int(i), int(j))] = category
    return out


def export_u_csv(u, defined, path, class_names=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["class", "name", "u", "defined"])
        for i, (val, ok) in enumerate(zip(u, defined)):
            name = class_names[i] if class_names else str(i)
            w.writerow([i, name, repr(float(val)), int(bool(ok))])


def export_v_csv(v, defined, path, class_names=None):
    """Heatmap-ready matrix: rows = correct class, columns = misclassified class."""
    c = v.shape[0]
    names = class_names if class_names else [str(i) for i in range(c)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true\\pred"] + list(names))
        for i in range(c):
            w.writerow([names[i]] + [repr(float(x)) for x in v[i]])


def export_ratio_csv(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["category", "value"])
        for cat in sorted(samples):
            for val in samples[cat].values:
                w.writerow([cat, repr(float(val))])


def write_homogeneity_report(result: HomogeneityResult, path):
    with open(path, "w") as fh:
        json.dump({
            "statistic": result.statistic,
            "degrees_of_freedom": result.degrees_of_freedom,
            "p_value": result.p_value,
            "dropped_columns": list(result.dropped_columns),
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
