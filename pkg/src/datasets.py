"""
Time Series Datasets
====================

Mackey-Glass generation, CSV ingestion, a synthetic load-like surrogate,
train-range normalization and washout/train/validation/test splits.

Default split: washout 10% / train 70% / validation 10% / test 10%. The
source protocol states 10% initialization + 80% training + 20% evaluation,
which sums to 110%; here the washout is carved out of the training region.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from numba import njit

logger = logging.getLogger(__name__)

MIN_SERIES_LENGTH = 100
TRANSIENT_TIME = 1000.0


@dataclass(frozen=True)
class SplitIndices:
    """Contiguous index ranges covering [0, T)"""

    washout: range
    train: range
    validation: range
    test: range

    @property
    def length(self) -> int:
        return self.test.stop

    def as_dict(self):
        return {
            name: [r.start, r.stop]
            for name, r in (
                ("washout", self.washout),
                ("train", self.train),
                ("validation", self.validation),
                ("test", self.test),
            )
        }


@dataclass(frozen=True)
class Normalization:
    """Original values = stored values * scale + shift"""

    shift: float = 0.0
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class SeriesDataset:
    """A scalar series with its split indices"""

    values: np.ndarray
    name: str
    splits: SplitIndices
    normalization: Normalization = field(default_factory=Normalization)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Dataset '{self.name}' contains non-finite values")
        if len(values) < MIN_SERIES_LENGTH:
            raise ValueError(
                f"Dataset '{self.name}' has {len(values)} samples; at least {MIN_SERIES_LENGTH} are required"
            )
        if self.splits.length != len(values):
            raise ValueError(f"Splits cover {self.splits.length} samples but the series has {len(values)}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MackeyGlassParams:
    """Parameters of do/dt = beta o(t-alpha) / (1 + o(t-alpha)^exponent) - gamma o(t)"""

    alpha: float = 17.0
    beta: float = 0.2
    gamma: float = 0.1
    exponent: float = 10.0
    dt: float = 0.1
    subsample: int = 10
    n_samples: int = 10000
    initial_value: float = 1.2
    transient: float = TRANSIENT_TIME

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.subsample < 1:
            raise ValueError(f"subsample must be >= 1, got {self.subsample}")
        if self.transient < 0:
            raise ValueError(f"transient must be non-negative, got {self.transient}")


def make_splits(
    length: int,
    washout_fraction: float = 0.1,
    train_fraction: float = 0.7,
    val_fraction: float = 0.1,
    test_fraction: float = 0.1,
) -> SplitIndices:
    """
    Partition [0, length) into washout, train, validation and test ranges

    Validation and test sizes are rounded from their fractions and placed
    at the end, the washout at the start, training takes the rest.

    Args:
        length: Series length
        washout_fraction, train_fraction, val_fraction, test_fraction: Must sum to 1

    Returns:
        SplitIndices
    """
    fractions = (washout_fraction, train_fraction, val_fraction, test_fraction)
    if any(f < 0 for f in fractions):
        raise ValueError(f"Split fractions must be non-negative, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"Split fractions must sum to 1, got {sum(fractions)}")

    n_test = int(round(length * test_fraction))
    n_val = int(round(length * val_fraction))
    n_washout = int(round(length * washout_fraction))
    if n_val == 0 or n_test == 0:
        raise ValueError("empty evaluation split: validation and test ranges must be non-empty")
    train_stop = length - n_val - n_test
    if train_stop - n_washout < 1:
        raise ValueError(f"empty training split for length {length} and fractions {fractions}")

    return SplitIndices(
        washout=range(0, n_washout),
        train=range(n_washout, train_stop),
        validation=range(train_stop, train_stop + n_val),
        test=range(train_stop + n_val, length),
    )


@njit(cache=True)
def _mackey_glass_kernel(alpha, beta, gamma, exponent, dt, initial_value, n_steps):
    """RK4 on a uniform grid with linearly interpolated delayed values"""
    history = np.empty(n_steps + 1)
    history[0] = initial_value
    delay = alpha / dt
    stages = np.empty(4)

    for k in range(n_steps):
        x = history[k]
        for s in range(4):
            if s == 0:
                offset = 0.0
                stage_x = x
            elif s == 1:
                offset = 0.5
                stage_x = x + 0.5 * dt * stages[0]
            elif s == 2:
                offset = 0.5
                stage_x = x + 0.5 * dt * stages[1]
            else:
                offset = 1.0
                stage_x = x + dt * stages[2]

            pos = k + offset - delay
            if pos <= 0.0:
                lagged = initial_value
            elif pos >= k:
                lagged = x
            else:
                lo = int(math.floor(pos))
                frac = pos - lo
                lagged = history[lo] + frac * (history[lo + 1] - history[lo])

            stages[s] = beta * lagged / (1.0 + lagged**exponent) - gamma * stage_x
        history[k + 1] = x + dt / 6.0 * (stages[0] + 2.0 * stages[1] + 2.0 * stages[2] + stages[3])
    return history


def mackey_glass(p: MackeyGlassParams, splits: Optional[SplitIndices] = None) -> SeriesDataset:
    """
    Integrate the Mackey-Glass delay differential equation

    The history on [-alpha, 0] is held at initial_value; `transient` time
    units are discarded, then one sample is kept every `subsample` steps.

    Args:
        p: Generator parameters
        splits: Optional split indices (default split otherwise)

    Returns:
        SeriesDataset named 'mackey_glass'
    """
    transient_steps = int(round(p.transient / p.dt))
    n_steps = transient_steps + (p.n_samples - 1) * p.subsample
    history = _mackey_glass_kernel(
        float(p.alpha), float(p.beta), float(p.gamma), float(p.exponent), float(p.dt),
        float(p.initial_value), n_steps,
    )
    values = history[transient_steps::p.subsample][: p.n_samples]
    logger.info(f"Generated Mackey-Glass series: {len(values)} samples, alpha={p.alpha}, dt={p.dt}")
    return SeriesDataset(
        values=values,
        name="mackey_glass",
        splits=splits if splits is not None else make_splits(len(values)),
    )


def load_csv(
    path,
    column: Union[str, int] = 0,
    has_header: bool = True,
    splits: Optional[SplitIndices] = None,
) -> SeriesDataset:
    """
    Read one numeric column of a CSV file

    Args:
        path: UTF-8, comma-separated file
        column: Column name (needs a header) or zero-based index
        has_header: Whether the first row is a header
        splits: Optional split indices

    Returns:
        SeriesDataset named after the file stem
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {path}")

    # Blank lines are kept so reported row numbers match the file
    df = pd.read_csv(
        path,
        header=0 if has_header else None,
        dtype=str,
        keep_default_na=False,
        skip_blank_lines=False,
        encoding="utf-8",
    )
    if isinstance(column, str) and not column.isdigit():
        if not has_header:
            raise ValueError(f"Column name '{column}' needs a header row; use an index instead")
        if column not in df.columns:
            raise ValueError(f"Column '{column}' not found in {path}; available: {list(df.columns)}")
        raw = df[column]
    else:
        index = int(column)
        if index < 0 or index >= df.shape[1]:
            raise ValueError(f"Column index {index} out of range for {path} ({df.shape[1]} columns)")
        raw = df.iloc[:, index]

    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad):
        row = int(bad[0]) + 1
        raise ValueError(f"Non-numeric value '{raw.iloc[bad[0]]}' in {path} at row {row}")
    if len(values) < MIN_SERIES_LENGTH:
        raise ValueError(f"{path} has {len(values)} rows; at least {MIN_SERIES_LENGTH} are required")

    logger.info(f"Loaded {len(values)} samples from {path} (column {column})")
    return SeriesDataset(
        values=values,
        name=path.stem,
        splits=splits if splits is not None else make_splits(len(values)),
    )


def synth_load(
    n: int,
    seed: int = 0,
    daily_period: int = 24,
    weekly_period: int = 168,
    noise_std: float = 0.1,
    daily_amplitude: float = 1.0,
    weekly_amplitude: float = 0.5,
    trend: float = 0.0,
    level: float = 0.0,
    splits: Optional[SplitIndices] = None,
) -> SeriesDataset:
    """
    Load-like surrogate: two sinusoids plus a linear trend plus Gaussian noise

    Without trend the variance over whole periods is
    daily_amplitude^2 / 2 + weekly_amplitude^2 / 2 + noise_std^2.
    """
    if n < MIN_SERIES_LENGTH:
        raise ValueError(f"synth_load needs n >= {MIN_SERIES_LENGTH}, got {n}")
    if daily_period < 1 or weekly_period < 1:
        raise ValueError("Periods must be positive")
    if noise_std < 0:
        raise ValueError(f"noise_std must be non-negative, got {noise_std}")

    t = np.arange(n, dtype=np.float64)
    values = (
        level
        + trend * t
        + daily_amplitude * np.sin(2.0 * np.pi * (t % daily_period) / daily_period)
        + weekly_amplitude * np.sin(2.0 * np.pi * (t % weekly_period) / weekly_period)
    )
    if noise_std > 0:
        values = values + np.random.default_rng(seed).normal(0.0, noise_std, size=n)

    return SeriesDataset(
        values=values,
        name="synth_load",
        splits=splits if splits is not None else make_splits(n),
    )


def normalize(ds: SeriesDataset) -> SeriesDataset:
    """
    Standardize to zero mean and unit variance using the train range only

    Returns:
        SeriesDataset with the composed (shift, scale) recorded
    """
    train = ds.values[ds.splits.train.start:ds.splits.train.stop]
    shift = float(np.mean(train))
    scale = float(np.std(train))
    if not scale > 0:
        raise ValueError(f"Dataset '{ds.name}' has zero variance over the train range")
    values = (ds.values - shift) / scale
    record = Normalization(
        shift=ds.normalization.shift + ds.normalization.scale * shift,
        scale=ds.normalization.scale * scale,
    )
    logger.debug(f"Normalized '{ds.name}': shift={shift:.6g}, scale={scale:.6g}")
    return replace(ds, values=values, normalization=record)


def denormalize(ds: SeriesDataset) -> SeriesDataset:
    """Undo every recorded normalization"""
    values = ds.values * ds.normalization.scale + ds.normalization.shift
    return replace(ds, values=values, normalization=Normalization())


def with_splits(ds: SeriesDataset, splits: SplitIndices) -> SeriesDataset:
    return replace(ds, splits=splits)


def export_csv(ds: SeriesDataset, path) -> Path:
    """Write the series as a one-column CSV ('value') readable by load_csv"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"value": ds.values}).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Dataset '{ds.name}' saved to: {path}")
    return path
