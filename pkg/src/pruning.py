"""
Centrality-Based Reservoir Pruning
==================================

Iteratively removes the lowest-ranked reservoir nodes, retrains the readout
on the reduced reservoir and records validation/test NRMSE after each step.

Selection uses validation error only: Optimal N minimizes validation NRMSE
(ties go to the larger reservoir) and Smallest N is the smallest size whose
validation NRMSE does not exceed the unpruned baseline. Test NRMSE is
reported at those sizes, never used to choose them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from centrality import MEASURES, centrality, rank_nodes
from datasets import SeriesDataset
from evaluation import Metric, score_horizon
from linalg import spectral_radius
from readout import TrainedEsn, design_rows, train_readout, StateHarvest
from reservoir import HyperParams, ReservoirWeights, drive, scale_to_radius

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "step", "n_remaining", "removed_count", "val_nrmse", "test_nrmse", "rho", "rescaled", "density", "measure",
]


class SweepFailedError(RuntimeError):
    """Raised when every pruning step of a sweep failed"""


@dataclass(frozen=True)
class PruneConfig:
    """
    Attributes:
        measure: Centrality measure used for ranking
        step: Nodes removed per iteration (None: max(1, N // 100))
        max_prune_fraction: Stop once this fraction of N has been removed
        recompute_each_step: Re-rank on the pruned graph (else rank once)
        esp_guard: Rescale W to the target radius when it reaches 1
        rank_by_magnitude: Rank C1/C2 by |score|
        eval_stride: Spacing of forecast origins when scoring a split
        trajectory_nrmse: Score all horizon steps instead of the last
    """

    measure: str = "C2"
    step: Optional[int] = None
    max_prune_fraction: float = 0.4
    recompute_each_step: bool = True
    esp_guard: bool = True
    rank_by_magnitude: bool = False
    eval_stride: int = 1
    trajectory_nrmse: bool = False

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"Unknown centrality measure '{self.measure}'")
        if self.step is not None and self.step < 1:
            raise ValueError(f"step must be >= 1, got {self.step}")
        if not 0.0 <= self.max_prune_fraction < 1.0:
            raise ValueError(f"max_prune_fraction must lie in [0, 1), got {self.max_prune_fraction}")
        if self.eval_stride < 1:
            raise ValueError(f"eval_stride must be >= 1, got {self.eval_stride}")

    def step_for(self, n: int) -> int:
        return self.step if self.step is not None else max(1, n // 100)


@dataclass(frozen=True)
class PruneStep:
    n_remaining: int
    removed_ids: Tuple[int, ...]
    val_nrmse: float
    test_nrmse: float
    rho: float
    rescaled: bool
    density: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class PruneCurve:
    measure: str
    n_initial: int
    baseline_val_nrmse: float
    baseline_test_nrmse: float
    baseline_rho: float
    baseline_density: float
    steps: List[PruneStep] = field(default_factory=list)
    optimal_n: int = 0
    optimal_val_nrmse: float = math.nan
    optimal_test_nrmse: float = math.nan
    smallest_n: int = 0

    @property
    def reduced_error(self) -> float:
        return self.baseline_test_nrmse - self.optimal_test_nrmse

    @property
    def reduced_error_pct(self) -> float:
        return 100.0 * self.reduced_error / self.baseline_test_nrmse if self.baseline_test_nrmse > 0 else 0.0

    def to_frame(self) -> pd.DataFrame:
        """Curve table; row 0 is the unpruned baseline"""
        rows = [
            {
                "step": 0,
                "n_remaining": self.n_initial,
                "removed_count": 0,
                "val_nrmse": self.baseline_val_nrmse,
                "test_nrmse": self.baseline_test_nrmse,
                "rho": self.baseline_rho,
                "rescaled": False,
                "density": self.baseline_density,
                "measure": self.measure,
            }
        ]
        for i, s in enumerate(self.steps, start=1):
            rows.append(
                {
                    "step": i,
                    "n_remaining": s.n_remaining,
                    "removed_count": len(s.removed_ids),
                    "val_nrmse": s.val_nrmse,
                    "test_nrmse": s.test_nrmse,
                    "rho": s.rho,
                    "rescaled": s.rescaled,
                    "density": s.density,
                    "measure": self.measure,
                }
            )
        return pd.DataFrame(rows, columns=CURVE_COLUMNS)

    def summary_dict(self) -> Dict[str, Any]:
        return {
            "measure": self.measure,
            "baseline": {
                "n": self.n_initial,
                "val_nrmse": self.baseline_val_nrmse,
                "test_nrmse": self.baseline_test_nrmse,
            },
            "optimal_n": self.optimal_n,
            "optimal_val_nrmse": self.optimal_val_nrmse,
            "optimal_test_nrmse": self.optimal_test_nrmse,
            "smallest_n": self.smallest_n,
            "reduced_error": self.reduced_error,
            "reduced_error_pct": self.reduced_error_pct,
            "failed_steps": sum(1 for s in self.steps if s.failed),
        }


def remove_nodes(rw: ReservoirWeights, ids: Sequence[int]) -> ReservoirWeights:
    """
    Delete nodes from the reservoir

    Rows and columns `ids` are dropped from W, rows from W_in (and W_back),
    entries from the bias.
    Surviving nodes keep their relative order.
    """
    ids = [int(i) for i in ids]
    n = rw.n_reservoir
    if len(set(ids)) != len(ids):
        raise ValueError(f"Duplicate node ids in {ids}")
    if any(i < 0 or i >= n for i in ids):
        raise ValueError(f"Node ids must lie in [0, {n}), got {ids}")
    if len(ids) >= n:
        raise ValueError(f"Cannot remove {len(ids)} of {n} nodes; at least one must remain")
    if not ids:
        return rw

    keep = np.setdiff1d(np.arange(n), ids)
    return ReservoirWeights(
        w=rw.w[np.ix_(keep, keep)],
        w_in=rw.w_in[keep],
        w_back=None if rw.w_back is None else rw.w_back[keep],
        bias=None if rw.bias is None else rw.bias[keep],
    )


def fit_and_score(
    rw: ReservoirWeights, data: SeriesDataset, hp: HyperParams, cfg: PruneConfig
) -> Tuple[TrainedEsn, Metric, Metric]:
    """
    Train a readout on the train split and score validation and test

    Teacher-forced states are computed once over the whole series; training
    pairs are u(t) = s(t), y(t) = s(t+1) for t in the train range, excluding
    the last train index so no validation value is used as a target.
    """
    series = data.values
    inputs = series[:, None]
    prev = inputs if rw.feedback_enabled else None
    states = drive(rw, inputs, prev_outputs=prev)

    start, stop = data.splits.train.start, data.splits.train.stop - 1
    rows = design_rows(inputs[start:stop], states[start:stop], None if prev is None else prev[start:stop])
    h = StateHarvest(design=rows, targets=series[start + 1:stop + 1, None])
    model = TrainedEsn(reservoir=rw, w_out=train_readout(h, hp.ridge_lambda), hp=hp)

    kwargs = dict(
        horizon=hp.horizon, stride=cfg.eval_stride, trajectory=cfg.trajectory_nrmse, prev_outputs=prev
    )
    val = score_horizon(model, series, states, data.splits.validation, **kwargs)
    test = score_horizon(model, series, states, data.splits.test, **kwargs)
    return model, val, test


def _select(curve_points: List[Tuple[int, float, float]], baseline_val: float):
    """Pick (optimal_n, val, test) and smallest_n from (n, val, test) points"""
    valid = [p for p in curve_points if np.isfinite(p[1])]
    optimal = min(valid, key=lambda p: (p[1], -p[0]))
    smallest = min(p[0] for p in valid if p[1] <= baseline_val)
    return optimal, smallest


def prune_sweep(rw: ReservoirWeights, data: SeriesDataset, cfg: PruneConfig, hp: HyperParams) -> PruneCurve:
    """
    Run the prune -> retrain -> evaluate loop

    Args:
        rw: Unpruned reservoir
        data: Normalized dataset with splits
        cfg: Pruning configuration
        hp: Hyperparameters (ridge penalty, horizon, target radius)

    Returns:
        PruneCurve with the baseline, every step and the selected sizes
    """
    n_initial = rw.n_reservoir
    _, base_val, base_test = fit_and_score(rw, data, hp, cfg)
    logger.info(
        f"Baseline N={n_initial} [{cfg.measure}]: val={base_val.nrmse:.6f} test={base_test.nrmse:.6f}"
    )

    step_size = cfg.step_for(n_initial)
    max_removed = min(int(math.floor(cfg.max_prune_fraction * n_initial)), n_initial - 1)

    alive = np.arange(n_initial)
    current = rw
    initial_order = None
    if not cfg.recompute_each_step:
        initial_order = rank_nodes(centrality(rw.w, cfg.measure), by_magnitude=cfg.rank_by_magnitude)

    steps: List[PruneStep] = []
    removed_total = 0
    while removed_total < max_removed:
        k = min(step_size, max_removed - removed_total)
        if cfg.recompute_each_step:
            order = rank_nodes(centrality(current.w, cfg.measure), by_magnitude=cfg.rank_by_magnitude)
            local = order[:k]
        else:
            alive_set = set(alive.tolist())
            chosen = [i for i in initial_order if i in alive_set][:k]
            local = np.searchsorted(alive, chosen).tolist()

        removed_ids = tuple(int(i) for i in alive[local])
        current = remove_nodes(current, local)
        alive = np.delete(alive, local)
        removed_total += len(removed_ids)

        rho = spectral_radius(current.w)
        rescaled = False
        if cfg.esp_guard and rho >= 1.0:
            current = ReservoirWeights(
                w=scale_to_radius(current.w, hp.spectral_radius_target),
                w_in=current.w_in,
                w_back=current.w_back,
                bias=current.bias,
            )
            logger.warning(f"Spectral radius {rho:.4f} >= 1 after pruning to N={len(alive)}; rescaled")
            rho = spectral_radius(current.w)
            rescaled = True

        error = None
        try:
            _, val, test = fit_and_score(current, data, hp, cfg)
            val_nrmse, test_nrmse = val.nrmse, test.nrmse
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.warning(f"Pruning step at N={len(alive)} failed: {e}")
            val_nrmse = test_nrmse = math.nan
            error = str(e)

        steps.append(
            PruneStep(
                n_remaining=len(alive),
                removed_ids=removed_ids,
                val_nrmse=val_nrmse,
                test_nrmse=test_nrmse,
                rho=rho,
                rescaled=rescaled,
                density=current.density(),
                error=error,
            )
        )
        logger.debug(f"N={len(alive)} val={val_nrmse:.6f} test={test_nrmse:.6f} rho={rho:.4f}")

    if steps and all(s.failed for s in steps):
        raise SweepFailedError(f"Every pruning step failed for measure {cfg.measure}: {steps[-1].error}")

    points = [(n_initial, base_val.nrmse, base_test.nrmse)]
    points += [(s.n_remaining, s.val_nrmse, s.test_nrmse) for s in steps if not s.failed]
    (optimal_n, optimal_val, optimal_test), smallest_n = _select(points, base_val.nrmse)

    curve = PruneCurve(
        measure=cfg.measure,
        n_initial=n_initial,
        baseline_val_nrmse=base_val.nrmse,
        baseline_test_nrmse=base_test.nrmse,
        baseline_rho=spectral_radius(rw.w),
        baseline_density=rw.density(),
        steps=steps,
        optimal_n=optimal_n,
        optimal_val_nrmse=optimal_val,
        optimal_test_nrmse=optimal_test,
        smallest_n=smallest_n,
    )
    logger.info(
        f"Sweep N={n_initial} [{cfg.measure}]: optimal N={optimal_n} (test {optimal_test:.6f}), "
        f"smallest N={smallest_n}"
    )
    return curve


def select_from_table(frame: pd.DataFrame) -> Dict[str, Any]:
    """
    Apply the same selection rule to a curve table (e.g. a seed-averaged one)

    Row with step 0 is the baseline.
    """
    base = frame.loc[frame["step"] == 0].iloc[0]
    points = [
        (int(r.n_remaining), float(r.val_nrmse), float(r.test_nrmse)) for r in frame.itertuples(index=False)
    ]
    (optimal_n, optimal_val, optimal_test), smallest_n = _select(points, float(base.val_nrmse))
    baseline_test = float(base.test_nrmse)
    reduced = baseline_test - optimal_test
    return {
        "initial_n": int(base.n_remaining),
        "initial_nrmse": baseline_test,
        "optimal_n": optimal_n,
        "optimal_val_nrmse": optimal_val,
        "optimal_nrmse": optimal_test,
        "reduced_error": reduced,
        "reduced_error_pct": 100.0 * reduced / baseline_test if baseline_test > 0 else 0.0,
        "smallest_n": smallest_n,
    }
