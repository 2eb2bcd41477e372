"""Group ratio, disparate impact, statistical parity, equalized odds, accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from masc.data_model import Dataset, group_cardinalities


class UndefinedMetricError(ValueError):
    pass


@dataclass
class FairnessReport:
    dataset_id: str
    method: str
    gr: np.ndarray
    di: dict[int, float]
    sp: dict[int, float]
    eq_odds: dict[int, float] | None = None
    accuracy: float | None = None
    extra: dict = field(default_factory=dict)


def group_ratio(ds: Dataset) -> np.ndarray:
    counts = group_cardinalities(ds)
    return counts / counts.sum()  # one division per entry, already correctly rounded


# Rates are kept as exact fractions of counts and rounded once, so every
# metric is the correctly rounded value of its rational definition.


def _positive_rate(y: np.ndarray, groups: np.ndarray, g: int) -> Fraction:
    members = groups == g
    n = int(members.sum())
    if n == 0:
        raise UndefinedMetricError(f"group {g} is empty")
    return Fraction(int(np.count_nonzero(y[members] == 1)), n)


def disparate_impact_from(y: np.ndarray, groups: np.ndarray, minority: int, majority: int) -> float:
    y, groups = np.asarray(y), np.asarray(groups)
    p_min = _positive_rate(y, groups, minority)
    p_maj = _positive_rate(y, groups, majority)
    if p_maj == 0:
        raise UndefinedMetricError(f"undefined DI: majority group {majority} has no positive outcome")
    return float(p_min / p_maj)


def statistical_parity_from(y: np.ndarray, groups: np.ndarray, minority: int, majority: int) -> float:
    y, groups = np.asarray(y), np.asarray(groups)
    return float(_positive_rate(y, groups, minority) - _positive_rate(y, groups, majority))


def disparate_impact(ds: Dataset, minority: int, majority: int) -> float:
    """P(Y=1 | minority) / P(Y=1 | majority), unclipped."""
    return disparate_impact_from(ds.targets, ds.group_labels, minority, majority)


def statistical_parity(ds: Dataset, minority: int, majority: int) -> float:
    """P(Y=1 | minority) - P(Y=1 | majority); negative favours the majority."""
    return statistical_parity_from(ds.targets, ds.group_labels, minority, majority)


def _error_rates(y_true, y_pred, groups, g) -> tuple[Fraction, Fraction]:
    members = groups == g
    pos = members & (y_true == 1)
    neg = members & (y_true == 0)
    if not pos.any():
        raise UndefinedMetricError(f"undefined rate: group {g} has no positive instance")
    if not neg.any():
        raise UndefinedMetricError(f"undefined rate: group {g} has no negative instance")
    fnr = Fraction(int(np.count_nonzero(y_pred[pos] == 0)), int(pos.sum()))
    fpr = Fraction(int(np.count_nonzero(y_pred[neg] == 1)), int(neg.sum()))
    return fnr, fpr


def equalized_odds(y_true, y_pred, groups, minority: int, majority: int) -> float:
    """|FNR_maj - FNR_min| + |FPR_maj - FPR_min|, in [0, 2]."""
    y_true, y_pred, groups = (np.asarray(a) for a in (y_true, y_pred, groups))
    if not (len(y_true) == len(y_pred) == len(groups)):
        raise ValueError("y_true, y_pred and groups must have equal length")
    fnr_maj, fpr_maj = _error_rates(y_true, y_pred, groups, majority)
    fnr_min, fpr_min = _error_rates(y_true, y_pred, groups, minority)
    return float(abs(fnr_maj - fnr_min) + abs(fpr_maj - fpr_min))


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError("length mismatch")
    if len(y_true) == 0:
        raise ValueError("accuracy of an empty prediction")
    return float(Fraction(int(np.count_nonzero(y_true == y_pred)), len(y_true)))


def _or_nan(fn, *args) -> float:
    try:
        return fn(*args)
    except UndefinedMetricError:
        return float("nan")


def dataset_report(ds: Dataset, method: str, majority: int | None = None) -> FairnessReport:
    """GR of every group, DI/SP of every minority vs ``majority``.

    ``majority`` defaults to the largest group of ``ds``. Undefined DI/SP
    values are reported as NaN rather than raised.
    """
    if majority is None:
        majority = int(np.argmax(group_cardinalities(ds)))
    minorities = [g for g in range(ds.schema.n_groups) if g != majority]
    return FairnessReport(
        dataset_id=ds.id,
        method=method,
        gr=group_ratio(ds),
        di={g: _or_nan(disparate_impact, ds, g, majority) for g in minorities},
        sp={g: _or_nan(statistical_parity, ds, g, majority) for g in minorities},
    )


def prediction_report(
    dataset_id: str,
    method: str,
    y_true,
    y_pred,
    groups,
    n_groups: int,
    majority: int = 0,
) -> FairnessReport:
    """Accuracy, Eq.Odds and DI/SP of the predictions per minority group."""
    y_true, y_pred, groups = (np.asarray(a) for a in (y_true, y_pred, groups))
    minorities = [g for g in range(n_groups) if g != majority]
    counts = np.bincount(groups, minlength=n_groups)
    return FairnessReport(
        dataset_id=dataset_id,
        method=method,
        gr=counts / counts.sum(),
        di={g: _or_nan(disparate_impact_from, y_pred, groups, g, majority) for g in minorities},
        sp={g: _or_nan(statistical_parity_from, y_pred, groups, g, majority) for g in minorities},
        eq_odds={g: _or_nan(equalized_odds, y_true, y_pred, groups, g, majority) for g in minorities},
        accuracy=accuracy(y_true, y_pred),
    )
