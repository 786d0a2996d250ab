"""
Prediction Error Metrics
========================

Normalized RMSE, repeated-seed statistics and horizon scoring of a trained
network on one split of a series.

    NRMSE = sqrt( sum_i (pred_i - target_i)^2 / (N * sigma2) )

sigma2 is the variance of the target signal over the evaluated range, so a
predictor that always outputs the mean scores exactly 1.0.
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence, Union

import numpy as np

from readout import TrainedEsn, free_run_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metric:
    nrmse: float
    n_points: int


@dataclass(frozen=True)
class RepStats:
    """Sample statistics of one configuration over repetitions"""

    mean: float
    std: float
    min: float
    max: float
    n_reps: int

    def to_dict(self):
        return asdict(self)


def nrmse(pred: Sequence[float], target: Sequence[float], sigma2: float) -> Metric:
    """
    Normalized root mean square error

    Args:
        pred: Predicted values
        target: True values, same non-zero length as pred
        sigma2: Positive normalization variance

    Returns:
        Metric
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if len(pred) != len(target):
        raise ValueError(f"Length mismatch: {len(pred)} predictions vs {len(target)} targets")
    if len(pred) == 0:
        raise ValueError("NRMSE needs at least one point")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    err = pred - target
    value = math.sqrt(float(np.dot(err, err)) / (len(err) * sigma2))
    return Metric(nrmse=value, n_points=len(err))


def aggregate(reps: Sequence[Union[Metric, float]]) -> RepStats:
    """
    Mean, sample std (n - 1), min and max over repetitions

    Sums use math.fsum so the result does not depend on the order of reps.
    """
    values = [r.nrmse if isinstance(r, Metric) else float(r) for r in reps]
    if not values:
        raise ValueError("aggregate needs at least one repetition")
    n = len(values)
    lo, hi = min(values), max(values)
    mean = min(max(math.fsum(values) / n, lo), hi)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1)) if n > 1 else 0.0
    return RepStats(mean=mean, std=std, min=lo, max=hi, n_reps=n)


def forecast_origins(eval_range: range, horizon: int, stride: int = 1) -> np.ndarray:
    """Origins t0 whose horizon-step target t0 + horizon falls inside eval_range"""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    start = max(eval_range.start - horizon, 0)
    stop = eval_range.stop - horizon
    origins = np.arange(start, stop, stride)
    if len(origins) == 0:
        raise ValueError(f"No forecast origins for range {eval_range} at horizon {horizon}")
    return origins


def score_horizon(
    model: TrainedEsn,
    series: np.ndarray,
    states: np.ndarray,
    eval_range: range,
    horizon: int,
    stride: int = 1,
    trajectory: bool = False,
    prev_outputs: Optional[np.ndarray] = None,
) -> Metric:
    """
    Free-run NRMSE of a model over one split

    Args:
        model: Trained network
        series: Scalar series (model input u(t) = series[t])
        states: Teacher-forced states, states[t] after consuming series[t]
        eval_range: Split whose values are scored
        horizon: Steps ahead
        stride: Spacing between forecast origins
        trajectory: Score every step 1..horizon instead of the last one
        prev_outputs: y(t) fed through W_back at each origin (feedback only)

    Returns:
        Metric
    """
    origins = forecast_origins(eval_range, horizon, stride)
    start_prev = None if prev_outputs is None else prev_outputs[origins]
    preds = free_run_batch(model, states[origins], series[origins][:, None], horizon, start_prev)[:, :, 0]

    sigma2 = float(np.var(series[eval_range.start:eval_range.stop]))
    if trajectory:
        steps = np.arange(1, horizon + 1)[:, None]
        truth = series[origins[None, :] + steps]
        return nrmse(preds.ravel(), truth.ravel(), sigma2)
    return nrmse(preds[-1], series[origins + horizon], sigma2)
