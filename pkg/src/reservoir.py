"""
Reservoir Construction
======================

Builds the fixed random reservoir of an Echo State Network and runs its
state update

    x(n+1) = tanh(W x(n) + W_in u(n+1) + b + W_back y(n))

The W_back term is only present when feedback is enabled. b is a constant
input bias drawn once per reservoir; it is absent when input_bias is 0.

Random streams: the seed feeds numpy's SeedSequence, which is split into
three PCG64 substreams, one each for W, W_in (then b) and W_back.
Changing one matrix's shape therefore never shifts the draws of another.
"""

import json
import logging
from dataclasses import dataclass, asdict, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from linalg import as_matrix, as_vector, frozen, matvec, spectral_radius

logger = logging.getLogger(__name__)

INTERNAL_WEIGHT_RANGE = 0.5


class DegenerateReservoirError(ValueError):
    """Raised when a reservoir matrix has zero spectral radius"""


@dataclass(frozen=True)
class HyperParams:
    """Experiment knobs for one reservoir"""

    n_reservoir: int = 200
    input_dim: int = 1
    output_dim: int = 1
    connectivity: float = 0.1
    spectral_radius_target: float = 0.9
    input_scaling: float = 0.2
    input_bias: float = 0.2
    ridge_lambda: float = 1e-6
    seed: int = 42
    feedback_enabled: bool = False
    washout_fraction: float = 0.1
    horizon: int = 84

    def __post_init__(self):
        if self.n_reservoir < 2:
            raise ValueError(f"n_reservoir must be >= 2, got {self.n_reservoir}")
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")
        if not 0.0 < self.connectivity <= 1.0:
            raise ValueError(f"connectivity must lie in (0, 1], got {self.connectivity}")
        if not 0.0 < self.spectral_radius_target < 1.0:
            raise ValueError(
                f"spectral_radius_target must lie in (0, 1) for the echo state property, "
                f"got {self.spectral_radius_target}"
            )
        if self.input_scaling <= 0:
            raise ValueError(f"input_scaling must be positive, got {self.input_scaling}")
        if self.input_bias < 0:
            raise ValueError(f"input_bias must be non-negative, got {self.input_bias}")
        if self.ridge_lambda < 0:
            raise ValueError(f"ridge_lambda must be non-negative, got {self.ridge_lambda}")
        if not 0.0 <= self.washout_fraction < 1.0:
            raise ValueError(f"washout_fraction must lie in [0, 1), got {self.washout_fraction}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "HyperParams":
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class ReservoirWeights:
    """
    The fixed random network

    Attributes:
        w: Internal weights, shape (n, n); entry (r, c) is the edge c -> r
        w_in: Input weights, shape (n, input_dim)
        w_back: Optional feedback weights, shape (n, output_dim)
        bias: Optional constant input bias, length n
    """

    w: np.ndarray
    w_in: np.ndarray
    w_back: Optional[np.ndarray] = field(default=None)
    bias: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        w = as_matrix(self.w, "W")
        w_in = as_matrix(self.w_in, "W_in")
        if w.shape[0] != w.shape[1]:
            raise ValueError(f"W must be square, got shape {w.shape}")
        if w_in.shape[0] != w.shape[0]:
            raise ValueError(f"W_in has {w_in.shape[0]} rows but W has {w.shape[0]}")
        object.__setattr__(self, "w", frozen(w))
        object.__setattr__(self, "w_in", frozen(w_in))
        if self.w_back is not None:
            w_back = as_matrix(self.w_back, "W_back")
            if w_back.shape[0] != w.shape[0]:
                raise ValueError(f"W_back has {w_back.shape[0]} rows but W has {w.shape[0]}")
            object.__setattr__(self, "w_back", frozen(w_back))
        if self.bias is not None:
            bias = as_vector(self.bias, "bias")
            if bias.shape != (w.shape[0],):
                raise ValueError(f"bias has shape {bias.shape}, expected ({w.shape[0]},)")
            object.__setattr__(self, "bias", frozen(bias))

    @property
    def n_reservoir(self) -> int:
        return self.w.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]

    @property
    def feedback_enabled(self) -> bool:
        return self.w_back is not None

    def density(self) -> float:
        """Fraction of nonzero entries in W"""
        return float(np.count_nonzero(self.w)) / self.w.size


def weight_streams(seed: int):
    """Return the (W, W_in, W_back) generators derived from seed"""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.Generator(np.random.PCG64(child)) for child in children)


def scale_to_radius(w: np.ndarray, rho: float) -> np.ndarray:
    """
    Rescale w so its spectral radius equals rho

    Args:
        w: Square matrix with nonzero spectral radius
        rho: Target radius (> 0)

    Returns:
        np.ndarray: w * (rho / spectral_radius(w))
    """
    if rho <= 0:
        raise ValueError(f"Target spectral radius must be positive, got {rho}")
    current = spectral_radius(w)
    if current == 0.0:
        raise DegenerateReservoirError("Cannot rescale a matrix with zero spectral radius")
    return w * (rho / current)


def generate_reservoir(hp: HyperParams) -> ReservoirWeights:
    """
    Draw a sparse signed reservoir and rescale it to the target radius

    Args:
        hp: Hyperparameters (size, connectivity, scaling, seed, feedback)

    Returns:
        ReservoirWeights: Deterministic for a given hp
    """
    rng_w, rng_in, rng_back = weight_streams(hp.seed)
    n = hp.n_reservoir

    values = rng_w.uniform(-INTERNAL_WEIGHT_RANGE, INTERNAL_WEIGHT_RANGE, size=(n, n))
    keep = rng_w.random((n, n)) < hp.connectivity
    w = np.where(keep, values, 0.0)

    if spectral_radius(w) == 0.0:
        raise DegenerateReservoirError(
            f"Degenerate reservoir: n={n}, connectivity={hp.connectivity} produced zero spectral radius"
        )
    w = scale_to_radius(w, hp.spectral_radius_target)

    w_in = rng_in.uniform(-hp.input_scaling, hp.input_scaling, size=(n, hp.input_dim))
    bias = rng_in.uniform(-hp.input_bias, hp.input_bias, size=n) if hp.input_bias > 0 else None
    w_back = None
    if hp.feedback_enabled:
        w_back = rng_back.uniform(-hp.input_scaling, hp.input_scaling, size=(n, hp.output_dim))

    reservoir = ReservoirWeights(w=w, w_in=w_in, w_back=w_back, bias=bias)
    logger.debug(f"Generated reservoir n={n} seed={hp.seed} density={reservoir.density():.3f}")
    return reservoir


def update_state(
    rw: ReservoirWeights, x: np.ndarray, u: np.ndarray, y_prev: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    One reservoir step: x' = tanh(W x + W_in u [+ b] [+ W_back y_prev])

    Args:
        rw: Reservoir weights
        x: Current state, length n
        u: Input at the next time step, length input_dim
        y_prev: Previous output; required iff the reservoir has W_back

    Returns:
        np.ndarray: New state (the input state is not modified)
    """
    if x.shape != (rw.n_reservoir,):
        raise ValueError(f"State has shape {x.shape}, expected ({rw.n_reservoir},)")
    if u.shape != (rw.input_dim,):
        raise ValueError(f"Input has shape {u.shape}, expected ({rw.input_dim},)")

    pre = matvec(rw.w, x) + matvec(rw.w_in, u)
    if rw.bias is not None:
        pre = pre + rw.bias
    if rw.w_back is not None:
        if y_prev is None:
            raise ValueError("Reservoir has feedback weights but no previous output was supplied")
        if y_prev.shape != (rw.w_back.shape[1],):
            raise ValueError(f"Previous output has shape {y_prev.shape}, expected ({rw.w_back.shape[1]},)")
        pre = pre + matvec(rw.w_back, y_prev)
    elif y_prev is not None:
        raise ValueError("Previous output supplied but the reservoir has no feedback weights")
    return np.tanh(pre)


def drive(
    rw: ReservoirWeights,
    inputs: np.ndarray,
    x0: Optional[np.ndarray] = None,
    prev_outputs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Run the reservoir over an input sequence

    Args:
        rw: Reservoir weights
        inputs: Array of shape (T, input_dim)
        x0: Initial state (zeros when omitted)
        prev_outputs: Array (T, output_dim) of y(n) fed through W_back

    Returns:
        np.ndarray: States of shape (T, n); row t follows inputs[t]
    """
    x = np.zeros(rw.n_reservoir) if x0 is None else as_vector(x0, "x0")
    states = np.empty((len(inputs), rw.n_reservoir))
    for t in range(len(inputs)):
        y_prev = None if prev_outputs is None else prev_outputs[t]
        x = update_state(rw, x, inputs[t], y_prev)
        states[t] = x
    return states


def reservoir_to_dict(rw: ReservoirWeights, hp: Optional[HyperParams] = None) -> Dict[str, Any]:
    """JSON-ready representation with matrices as nested row lists"""
    doc: Dict[str, Any] = {
        "hyperparams": hp.to_dict() if hp is not None else None,
        "w": rw.w.tolist(),
        "w_in": rw.w_in.tolist(),
    }
    if rw.w_back is not None:
        doc["w_back"] = rw.w_back.tolist()
    if rw.bias is not None:
        doc["bias"] = rw.bias.tolist()
    return doc


def reservoir_from_dict(doc: Dict[str, Any]):
    """
    Rebuild weights (and hyperparameters when present) from a JSON document

    Returns:
        tuple: (ReservoirWeights, Optional[HyperParams])
    """
    rw = ReservoirWeights(w=doc["w"], w_in=doc["w_in"], w_back=doc.get("w_back"), bias=doc.get("bias"))
    hp = HyperParams.from_dict(doc["hyperparams"]) if doc.get("hyperparams") else None
    return rw, hp


def save_reservoir(rw: ReservoirWeights, path, hp: Optional[HyperParams] = None) -> Path:
    """Write the reservoir JSON document to path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(reservoir_to_dict(rw, hp), f)
    logger.info(f"Reservoir saved to: {path}")
    return path


def load_reservoir(path):
    """Read a reservoir JSON document; returns (ReservoirWeights, Optional[HyperParams])"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Reservoir file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return reservoir_from_dict(doc)


def sequence_to_array(seq: Sequence, name: str = "sequence") -> np.ndarray:
    """Stack a sequence of vectors (or scalars) into a (T, dim) float array"""
    arr = np.array(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a sequence of vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf values")
    return arr
