"""
Pruning Experiment Runner
=========================

Back end of the experiment CLI: builds datasets from configuration, runs one
prune sweep per (reservoir size, measure, seed) replica, and persists
curves, seed-averaged curves, summaries and a run manifest.

Replica k of a configuration uses seed base_seed + k. Replicas may run on a
process pool; all files are written by the calling process in
(size, measure, seed) order.
"""

import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from centrality import MEASURES, export_scores
from config_manager import Config, ConfigError
from datasets import (
    MackeyGlassParams, SeriesDataset, export_csv, load_csv, mackey_glass, make_splits, normalize,
    synth_load, with_splits,
)
from evaluation import aggregate
from pruning import CURVE_COLUMNS, PruneConfig, PruneCurve, prune_sweep, select_from_table
from report_formatter import SummaryReportFormatter
from reservoir import HyperParams, generate_reservoir, load_reservoir, save_reservoir
from svg_plot import plot_curves

logger = logging.getLogger(__name__)

LIBRARY_VERSION = "0.1.0"
FLOAT_FORMAT = "%.10e"

SUMMARY_COLUMNS = [
    "size", "measure", "initial_n", "initial_nrmse", "optimal_n", "optimal_nrmse",
    "reduced_error", "reduced_error_pct", "smallest_n", "n_seeds",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, typed view of an experiment configuration"""

    dataset: Dict[str, Any]
    splits: Dict[str, float]
    hp: HyperParams
    prune: PruneConfig
    measures: Tuple[str, ...]
    reservoir_sizes: Tuple[int, ...]
    n_reps: int
    base_seed: int
    horizon: int
    output_dir: Path
    workers: int = 1
    plot: bool = False
    raw: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: Config) -> "ExperimentConfig":
        """
        Build from a Config, validating it first

        Raises:
            ConfigError: Schema or cross-field validation failed
        """
        config.require_valid()
        c = config.config
        reservoir = c["reservoir"]
        evaluation = c["evaluation"]
        pruning = c["pruning"]
        experiment = c["experiment"]
        try:
            hp = HyperParams(
                n_reservoir=experiment["reservoir_sizes"][0],
                connectivity=reservoir["connectivity"],
                spectral_radius_target=reservoir["spectral_radius"],
                input_scaling=reservoir["input_scaling"],
                input_bias=reservoir["input_bias"],
                ridge_lambda=reservoir["ridge_lambda"],
                seed=experiment["base_seed"],
                feedback_enabled=reservoir["feedback_enabled"],
                washout_fraction=c["splits"]["washout_fraction"],
                horizon=evaluation["horizon"],
            )
            prune = PruneConfig(
                measure=experiment["measures"][0],
                step=pruning["step"],
                max_prune_fraction=pruning["max_prune_fraction"],
                recompute_each_step=pruning["recompute_each_step"],
                esp_guard=pruning["esp_guard"],
                rank_by_magnitude=pruning["rank_by_magnitude"],
                eval_stride=evaluation["eval_stride"],
                trajectory_nrmse=evaluation["trajectory_nrmse"],
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

        return cls(
            dataset=dict(c["dataset"]),
            splits=dict(c["splits"]),
            hp=hp,
            prune=prune,
            measures=tuple(experiment["measures"]),
            reservoir_sizes=tuple(experiment["reservoir_sizes"]),
            n_reps=experiment["n_reps"],
            base_seed=experiment["base_seed"],
            horizon=evaluation["horizon"],
            output_dir=Path(c["paths"]["output_dir"]),
            workers=experiment["workers"],
            plot=experiment["plot"],
            raw=c,
        )


@dataclass(frozen=True)
class Replica:
    size: int
    measure: str
    seed: int

    @property
    def curve_name(self) -> str:
        return f"curve_{self.size}_{self.measure}_{self.seed}.csv"

    @property
    def curve_summary_name(self) -> str:
        return f"curve_{self.size}_{self.measure}_{self.seed}.json"


@dataclass
class ReplicaResult:
    replica: Replica
    curve: Optional[PruneCurve] = None
    error: Optional[str] = None


@dataclass
class ExperimentResult:
    output_dir: Path
    results: List[ReplicaResult]
    summary: Dict[str, Any]
    wall_clock_seconds: float

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.results if r.curve is None)


def build_dataset(dataset: Dict[str, Any], splits: Dict[str, float]) -> SeriesDataset:
    """
    Create the raw (un-normalized) dataset described by a config section

    Raises:
        ValueError: Unknown kind or invalid parameters
        FileNotFoundError: CSV path missing
    """
    kind = dataset.get("kind")
    fractions = (
        splits["washout_fraction"], splits["train_fraction"], splits["val_fraction"], splits["test_fraction"],
    )
    if kind == "mackey-glass":
        params = MackeyGlassParams(
            alpha=dataset.get("alpha", 17.0),
            dt=dataset.get("dt", 0.1),
            subsample=dataset.get("subsample", 10),
            n_samples=dataset.get("n_samples", 10000),
            initial_value=dataset.get("initial_value", 1.2),
        )
        ds = mackey_glass(params, splits=make_splits(params.n_samples, *fractions))
    elif kind == "csv":
        path = dataset.get("path")
        if not path:
            raise ValueError("CSV dataset needs a path")
        ds = load_csv(path, column=dataset.get("column", 0), has_header=dataset.get("has_header", True))
        ds = with_splits(ds, make_splits(len(ds), *fractions))
    elif kind == "synth-load":
        n = dataset.get("n_samples", 10000)
        ds = synth_load(
            n,
            seed=dataset.get("seed", 0),
            daily_period=dataset.get("daily_period", 24),
            weekly_period=dataset.get("weekly_period", 168),
            noise_std=dataset.get("noise_std", 0.1),
            trend=dataset.get("trend", 0.0),
            splits=make_splits(n, *fractions),
        )
    else:
        raise ValueError(f"Unknown dataset kind '{kind}'; expected mackey-glass, csv or synth-load")
    return ds


def dataset_summary(ds: SeriesDataset) -> Dict[str, Any]:
    return {
        "name": ds.name,
        "length": len(ds),
        "min": float(np.min(ds.values)),
        "max": float(np.max(ds.values)),
        "splits": ds.splits.as_dict(),
    }


def cmd_generate(ecfg: ExperimentConfig, output_path: Optional[Path] = None) -> Tuple[Path, Dict[str, Any]]:
    """
    Write the configured dataset to CSV

    Returns:
        tuple: (written path, dataset summary)
    """
    ds = build_dataset(ecfg.dataset, ecfg.splits)
    path = Path(output_path) if output_path is not None else ecfg.output_dir / f"{ds.name}.csv"
    export_csv(ds, path)
    return path, dataset_summary(ds)


def cmd_centrality(
    ecfg: ExperimentConfig,
    output_path: Path,
    reservoir_path: Optional[Path] = None,
    size: Optional[int] = None,
    seed: Optional[int] = None,
    save_path: Optional[Path] = None,
) -> Path:
    """
    Dump centrality scores for a serialized or freshly generated reservoir

    Args:
        ecfg: Experiment configuration (generation hyperparameters)
        output_path: Score CSV to write
        reservoir_path: Reservoir JSON to load instead of generating one
        size: Reservoir size when generating (default: first configured size)
        seed: Seed when generating (default: base seed)
        save_path: Optional path to save the generated reservoir
    """
    if reservoir_path is not None:
        rw, _ = load_reservoir(reservoir_path)
        logger.info(f"Loaded reservoir with N={rw.n_reservoir} from {reservoir_path}")
    else:
        hp = replace(
            ecfg.hp,
            n_reservoir=size if size is not None else ecfg.reservoir_sizes[0],
            seed=seed if seed is not None else ecfg.base_seed,
        )
        rw = generate_reservoir(hp)
        if save_path is not None:
            save_reservoir(rw, save_path, hp)
    return export_scores(rw.w, output_path, MEASURES)


def replicas_for(ecfg: ExperimentConfig) -> List[Replica]:
    """All replicas in deterministic (size, measure, seed) order"""
    return [
        Replica(size=size, measure=measure, seed=ecfg.base_seed + k)
        for size in ecfg.reservoir_sizes
        for measure in ecfg.measures
        for k in range(ecfg.n_reps)
    ]


def run_replica(ecfg: ExperimentConfig, data: SeriesDataset, replica: Replica) -> ReplicaResult:
    """Build one reservoir and sweep it; failures are returned, not raised"""
    hp = replace(ecfg.hp, n_reservoir=replica.size, seed=replica.seed)
    cfg = replace(ecfg.prune, measure=replica.measure)
    try:
        rw = generate_reservoir(hp)
        curve = prune_sweep(rw, data, cfg, hp)
        return ReplicaResult(replica=replica, curve=curve)
    except Exception as e:
        logger.warning(f"Replica N={replica.size} {replica.measure} seed={replica.seed} failed: {e}")
        return ReplicaResult(replica=replica, error=f"{type(e).__name__}: {e}")


def _run_all(ecfg: ExperimentConfig, data: SeriesDataset, replicas: List[Replica]) -> List[ReplicaResult]:
    if ecfg.workers <= 1 or len(replicas) <= 1:
        results = []
        for i, replica in enumerate(replicas, start=1):
            logger.info(f"Replica {i}/{len(replicas)}: N={replica.size} {replica.measure} seed={replica.seed}")
            results.append(run_replica(ecfg, data, replica))
        return results

    logger.info(f"Running {len(replicas)} replicas on {ecfg.workers} worker processes")
    with ProcessPoolExecutor(max_workers=ecfg.workers) as pool:
        futures = [pool.submit(run_replica, ecfg, data, replica) for replica in replicas]
        return [future.result() for future in futures]


def mean_curve(frames: List[pd.DataFrame]) -> pd.DataFrame:
    """
    Seed-averaged curve of one (size, measure) configuration

    Steps are aligned by index; every seed removes the same counts, so
    n_remaining and removed_count agree across frames. Failed steps (NaN)
    are left out of the mean.
    """
    stacked = pd.concat(frames, ignore_index=True)
    numeric = ["val_nrmse", "test_nrmse", "rho", "density"]
    grouped = stacked.groupby(["step", "n_remaining", "removed_count"], sort=True)
    averaged = grouped[numeric].mean().reset_index()
    averaged["rescaled_fraction"] = grouped["rescaled"].mean().to_numpy()
    averaged["n_seeds"] = grouped["val_nrmse"].count().to_numpy()
    averaged["measure"] = stacked["measure"].iloc[0]
    return averaged


def build_summary(ecfg: ExperimentConfig, data: SeriesDataset, results: List[ReplicaResult]) -> Dict[str, Any]:
    """
    Aggregate replica curves into summary rows

    Optimal and Smallest N are chosen on the seed-averaged validation curve;
    per-seed statistics of the individually selected optima are attached.
    """
    rows: List[Dict[str, Any]] = []
    mean_curves: Dict[Tuple[int, str], pd.DataFrame] = {}

    for size in ecfg.reservoir_sizes:
        for measure in ecfg.measures:
            curves = [
                r.curve for r in results
                if r.curve is not None and r.replica.size == size and r.replica.measure == measure
            ]
            if not curves:
                logger.warning(f"No successful replicas for N={size} {measure}")
                continue
            averaged = mean_curve([c.to_frame() for c in curves])
            mean_curves[(size, measure)] = averaged
            row = {"size": size, "measure": measure}
            row.update(select_from_table(averaged))
            row["n_seeds"] = len(curves)
            row["per_seed"] = {
                "initial_nrmse": aggregate([c.baseline_test_nrmse for c in curves]).to_dict(),
                "optimal_nrmse": aggregate([c.optimal_test_nrmse for c in curves]).to_dict(),
                "optimal_n": aggregate([c.optimal_n for c in curves]).to_dict(),
                "smallest_n": aggregate([c.smallest_n for c in curves]).to_dict(),
                "reduced_error_pct": aggregate([c.reduced_error_pct for c in curves]).to_dict(),
            }
            rows.append(row)

    best_measure: Dict[str, str] = {}
    for size in ecfg.reservoir_sizes:
        candidates = [r for r in rows if r["size"] == size]
        if candidates:
            best = max(candidates, key=lambda r: (r["reduced_error"], -ecfg.measures.index(r["measure"])))
            best_measure[str(size)] = best["measure"]

    return {
        "dataset": data.name,
        "horizon": ecfg.horizon,
        "n_reps": ecfg.n_reps,
        "rows": rows,
        "best_measure": best_measure,
        "failed_replicas": [
            {"size": r.replica.size, "measure": r.replica.measure, "seed": r.replica.seed, "error": r.error}
            for r in results if r.curve is None
        ],
        "_mean_curves": mean_curves,
    }


def write_results(
    ecfg: ExperimentConfig, results: List[ReplicaResult], summary: Dict[str, Any], wall_clock: float,
    started_at: str,
) -> None:
    """Persist curves, summaries and the manifest under output_dir"""
    out = ecfg.output_dir
    out.mkdir(parents=True, exist_ok=True)

    for r in results:
        if r.curve is not None:
            r.curve.to_frame().to_csv(out / r.replica.curve_name, index=False, float_format=FLOAT_FORMAT)
            with open(out / r.replica.curve_summary_name, "w", encoding="utf-8") as f:
                json.dump(r.curve.summary_dict(), f, indent=2)

    mean_paths = []
    for (size, measure), frame in summary["_mean_curves"].items():
        path = out / f"mean_curve_{size}_{measure}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        mean_paths.append(path)

    public = {k: v for k, v in summary.items() if not k.startswith("_")}
    table = pd.DataFrame([{k: row[k] for k in SUMMARY_COLUMNS} for row in public["rows"]], columns=SUMMARY_COLUMNS)
    table.to_csv(out / "summary.csv", index=False, float_format=FLOAT_FORMAT)

    formatter = SummaryReportFormatter()
    formatter.save_report(formatter.generate_report(public, format='json'), out / "summary.json", format='json')
    formatter.save_report(formatter.generate_report(public, format='markdown'), out / "summary.md")

    if ecfg.plot and mean_paths:
        plot_curves(mean_paths, out / "figures" / "prune_curves.svg")

    manifest = {
        "library_version": LIBRARY_VERSION,
        "numpy_version": np.__version__,
        "pandas_version": pd.__version__,
        "python_version": platform.python_version(),
        "started_at": started_at,
        "wall_clock_seconds": wall_clock,
        "replicas": len(results),
        "failed_replicas": sum(1 for r in results if r.curve is None),
        "curve_columns": CURVE_COLUMNS,
        "config": ecfg.raw,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, default=str)
    logger.info(f"Results written to: {out}")


def cmd_run(ecfg: ExperimentConfig) -> ExperimentResult:
    """
    Run every replica of the experiment and persist the results

    Dataset construction errors propagate before any replica starts;
    replica failures are logged, counted and listed in the summary.
    """
    started_at = datetime.now().isoformat(timespec="seconds")
    start = time.perf_counter()

    data = normalize(build_dataset(ecfg.dataset, ecfg.splits))
    replicas = replicas_for(ecfg)
    logger.info(
        f"Running {len(replicas)} replicas: sizes={list(ecfg.reservoir_sizes)} "
        f"measures={list(ecfg.measures)} reps={ecfg.n_reps} on '{data.name}' ({len(data)} samples)"
    )

    results = _run_all(ecfg, data, replicas)
    summary = build_summary(ecfg, data, results)
    wall_clock = time.perf_counter() - start
    write_results(ecfg, results, summary, wall_clock, started_at)

    public = {k: v for k, v in summary.items() if not k.startswith("_")}
    result = ExperimentResult(
        output_dir=ecfg.output_dir, results=results, summary=public, wall_clock_seconds=wall_clock
    )
    if result.n_failed:
        logger.warning(f"{result.n_failed} of {len(results)} replicas failed")
    return result


def curve_files(directory: Path) -> List[Path]:
    """Seed-averaged curves of a run directory, or per-seed curves when none exist"""
    directory = Path(directory)
    mean = sorted(directory.glob("mean_curve_*.csv"))
    return mean if mean else sorted(directory.glob("curve_*.csv"))
