"""Margin-based scoring of detected change points: matching, F1 and CP-AUC."""

from dataclasses import asdict, dataclass

import numpy as np

from .detector import local_maxima
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class EvalReport:
    f1: float
    precision: float
    recall: float
    true_positives: int
    false_positives: int
    false_negatives: int
    margin: int
    auc: float | None = None

    def as_dict(self):
        return asdict(self)


def _points(x):
    cps = getattr(x, "change_points", x)
    return [int(c) for c in cps]


def match_detections(detections, truth, margin):
    """Greedy one-to-one matching within ``+-margin``. Returns ``(tp, fp, fn)``.

    Truths are processed in increasing order; each claims the nearest
    unclaimed detection within the margin (the earlier one on a distance tie).
    """
    if margin < 1:
        raise InvalidArgumentError(f"margin must be at least 1, got {margin}")
    dets = sorted(_points(detections))
    claimed = [False] * len(dets)
    tp = 0
    for c in sorted(_points(truth)):
        best = None
        best_dist = None
        for k, d in enumerate(dets):
            if claimed[k]:
                continue
            dist = abs(d - c)
            if dist <= margin and (best is None or dist < best_dist):
                best, best_dist = k, dist
        if best is not None:
            claimed[best] = True
            tp += 1
    return tp, len(dets) - tp, len(_points(truth)) - tp


def _f1(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0, precision, recall
    return 2 * precision * recall / (precision + recall), precision, recall


def f1_score(detections, truth, margin):
    tp, fp, fn = match_detections(detections, truth, margin)
    f1, precision, recall = _f1(tp, fp, fn)
    return EvalReport(
        f1=f1,
        precision=precision,
        recall=recall,
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        margin=int(margin),
    )


def _trace_arrays(trace):
    if hasattr(trace, "times"):
        times, values = trace.times, trace.values
    else:
        times, values = trace
    return np.asarray(times, dtype=np.int64), np.asarray(values, dtype=np.float64)


def roc_points(trace, truth, margin, delta):
    """``(fpr, tpr)`` pairs from sweeping the detection threshold.

    Thresholds run from ``+inf`` through the distinct trace values (in
    decreasing order) to ``-inf``. The false positive rate divides the false
    positives at each threshold by the number of unmatched candidates at the
    loosest threshold (every local maximum), clipped to 1; with no such
    candidates it stays 0.
    """
    times, values = _trace_arrays(trace)
    if len(times) == 0:
        raise InvalidArgumentError("trace is empty")
    positives = len(_points(truth))
    candidates = local_maxima(times, values, delta, -np.inf)
    _, fp_max, _ = match_detections(candidates, truth, margin)
    denom = max(1, fp_max)
    cand_values = dict(zip(times.tolist(), values.tolist()))
    thresholds = [np.inf, *np.unique(values)[::-1], -np.inf]
    points = []
    for eta in thresholds:
        dets = [t for t in candidates if cand_values[t] > eta]
        tp, fp, _ = match_detections(dets, truth, margin)
        tpr = tp / positives if positives else 0.0
        points.append((min(1.0, fp / denom), tpr))
    return points


def cp_auc(trace, truth, margin, delta):
    """Area under the threshold-swept ROC curve of peak detections.

    The curve is closed at ``fpr = 1`` with the true positive rate of the
    loosest threshold. A trace whose only peak sits on the single true change
    point scores 1; a constant trace yields one candidate (its first index)
    and scores that candidate's recall.
    """
    pts = roc_points(trace, truth, margin, delta)
    pts.append((1.0, pts[-1][1]))
    fpr = np.array([p[0] for p in pts])
    tpr = np.array([p[1] for p in pts])
    # thresholds decrease along the curve; fpr is non-decreasing in practice,
    # enforce it so a pathological greedy match cannot fold the curve back
    fpr = np.maximum.accumulate(fpr)
    area = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return min(1.0, max(0.0, area))


def evaluate(trace, truth, margin, delta=None, eta=None):
    """F1 at ``eta`` (default: the trace's config) plus CP-AUC."""
    config = trace.config
    delta = config.delta if delta is None else delta
    eta = config.eta if eta is None else eta
    dets = local_maxima(trace.times, trace.values, delta, eta)
    report = f1_score(dets, truth, margin)
    return EvalReport(**{**report.as_dict(), "auc": cp_auc(trace, truth, margin, delta)})
