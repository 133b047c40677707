"""Two-sample pooled t-test with an explicitly integrated t CDF.

The t density is evaluated from its closed form (Lanczos log-gamma) and
the CDF is obtained by adaptive Simpson quadrature of that density, so
the whole chain is checked end to end rather than delegated to a stats
library. The pooled standard error and degrees of freedom follow an
n1+n2-1 convention by default; ``df_rule="standard"`` switches both to
the textbook n1+n2-2.
"""

import json
import math
from dataclasses import dataclass

from .special import gammaln

DF_RULES = ("paper", "standard")


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    pooled_se: float
    mean1: float
    mean2: float
    sd1: float
    sd2: float
    n1: int
    n2: int
    df_rule: str


class DegenerateSamplesError(ValueError):
    """Both samples constant with unequal means: t would be infinite."""


def t_density(s: float, d: int) -> float:
    if d < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {d}")
    lognorm = gammaln((d + 1) / 2.0) - gammaln(d / 2.0) - 0.5 * math.log(d * math.pi)
    return math.exp(lognorm - ((d + 1) / 2.0) * math.log1p(s * s / d))


def _simpson(f, a, b, fa, fm, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(f, a, m, fa, flm, fm)
    right = _simpson(f, m, b, fm, frm, fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + \
        _adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)


def integrate_adaptive(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(f, a, b, fa, fm, fb)
    return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50)


def t_cdf(x: float, d: int) -> float:
    """CDF of the t distribution, integrated from the density (tol 1e-10)."""
    if d < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {d}")
    if x == 0.0:
        return 0.5
    # Integrate on [0, |x|]; the tail beyond |x| never needs evaluating.
    half = integrate_adaptive(lambda s: t_density(s, d), 0.0, abs(x), tol=1e-10)
    half = min(half, 0.5)
    return 0.5 + half if x > 0 else 0.5 - half


def pooled_se(sd1: float, sd2: float, n1: int, n2: int, df_rule: str = "paper") -> float:
    """Pooled standard error; denominator n1+n2-1 ("paper") or n1+n2-2 ("standard")."""
    if df_rule not in DF_RULES:
        raise ValueError(f"df_rule must be one of {DF_RULES}, got {df_rule!r}")
    if n1 + n2 < 3:
        raise ValueError("need n1 + n2 >= 3")
    denom = n1 + n2 - 1 if df_rule == "paper" else n1 + n2 - 2
    return math.sqrt(((n1 - 1) * sd1 ** 2 + (n2 - 1) * sd2 ** 2) / denom)


def _mean_sd(xs):
    n = len(xs)
    m = math.fsum(xs) / n
    var = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return m, math.sqrt(var)


def two_sample_t_test(sample1, sample2, df_rule: str = "paper") -> TTestResult:
    if df_rule not in DF_RULES:
        raise ValueError(f"df_rule must be one of {DF_RULES}, got {df_rule!r}")
    n1, n2 = len(sample1), len(sample2)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least 2 values")
    mean1, sd1 = _mean_sd(sample1)
    mean2, sd2 = _mean_sd(sample2)
    se = pooled_se(sd1, sd2, n1, n2, df_rule=df_rule)
    df = n1 + n2 - 1 if df_rule == "paper" else n1 + n2 - 2
    if se == 0.0:
        if mean1 == mean2:
            return TTestResult(0.0, df, 1.0, se, mean1, mean2, sd1, sd2, n1, n2, df_rule)
        raise DegenerateSamplesError(
            "both samples are constant with unequal means; t is infinite")
    t = (mean1 - mean2) / (se * math.sqrt(1.0 / n1 + 1.0 / n2))
    p = 2.0 * (1.0 - t_cdf(abs(t), df))
    p = min(max(p, 0.0), 1.0)
    return TTestResult(t, df, p, se, mean1, mean2, sd1, sd2, n1, n2, df_rule)


def result_to_dict(result: TTestResult, category_names=("morphology", "interference")):
    return {
        "t": result.t_statistic,
        "df": result.degrees_of_freedom,
        "p": result.p_value,
        "pooled_se": result.pooled_se,
        "means": [result.mean1, result.mean2],
        "sds": [result.sd1, result.sd2],
        "n1": result.n1,
        "n2": result.n2,
        "df_rule": result.df_rule,
        "category_names": list(category_names),
    }


def write_report(result: TTestResult, path, category_names=("morphology", "interference")):
    with open(path, "w") as fh:
        json.dump(result_to_dict(result, category_names), fh, indent=2, sort_keys=True)
        fh.write("\n")
