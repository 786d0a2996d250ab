"""
Linear Readout
==============

Harvests reservoir states under teacher forcing, trains the readout by ridge
regression and produces one-step and free-running predictions.

The readout input is the row [1, u(n+1), x(n+1)] (bias, input, state). When
the reservoir has feedback weights the previous output y(n) is appended, which
gives the full [u(n+1), x(n+1), y(n)] form plus a bias.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from linalg import as_matrix, frozen, matvec, ridge_solve
from reservoir import (
    HyperParams, ReservoirWeights, drive, reservoir_from_dict, reservoir_to_dict, sequence_to_array, update_state,
)

logger = logging.getLogger(__name__)


def feature_width(rw: ReservoirWeights) -> int:
    """Number of readout columns: bias + input + state (+ previous output)"""
    width = 1 + rw.input_dim + rw.n_reservoir
    if rw.w_back is not None:
        width += rw.w_back.shape[1]
    return width


@dataclass(frozen=True, eq=False)
class TrainedEsn:
    """Reservoir plus trained readout weights"""

    reservoir: ReservoirWeights
    w_out: np.ndarray
    hp: HyperParams

    def __post_init__(self):
        w_out = as_matrix(self.w_out, "W_out")
        expected = feature_width(self.reservoir)
        if w_out.shape[1] != expected:
            raise ValueError(f"W_out has {w_out.shape[1]} columns, expected {expected}")
        object.__setattr__(self, "w_out", frozen(w_out))

    @property
    def output_dim(self) -> int:
        return self.w_out.shape[0]


@dataclass(frozen=True, eq=False)
class StateHarvest:
    """Design rows [1, u, x (, y_prev)] and matching targets, washout excluded"""

    design: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.design.shape[0] != self.targets.shape[0]:
            raise ValueError(
                f"Harvest has {self.design.shape[0]} design rows but {self.targets.shape[0]} target rows"
            )


def design_rows(inputs: np.ndarray, states: np.ndarray, prev_outputs: Optional[np.ndarray] = None) -> np.ndarray:
    """Stack readout feature rows for aligned inputs/states (and previous outputs)"""
    blocks = [np.ones((len(states), 1)), inputs, states]
    if prev_outputs is not None:
        blocks.append(prev_outputs)
    return np.hstack(blocks)


def teacher_prev_outputs(targets: np.ndarray) -> np.ndarray:
    """y(n) aligned with step n+1: zeros first, then targets shifted by one"""
    return np.vstack([np.zeros((1, targets.shape[1])), targets[:-1]])


def harvest(rw: ReservoirWeights, inputs: Sequence, targets: Sequence, washout: int) -> StateHarvest:
    """
    Run the reservoir from x(0) = 0 with teacher-forced inputs and collect
    readout rows for every step at or after washout

    Args:
        rw: Reservoir weights
        inputs: T input vectors
        targets: T target vectors, targets[t] paired with inputs[t]
        washout: Number of leading steps to discard

    Returns:
        StateHarvest: T - washout rows
    """
    inputs = sequence_to_array(inputs, "inputs")
    targets = sequence_to_array(targets, "targets")
    if len(inputs) == 0:
        raise ValueError("Cannot harvest states from an empty sequence")
    if len(inputs) != len(targets):
        raise ValueError(f"inputs have {len(inputs)} steps but targets have {len(targets)}")
    if washout < 0 or washout >= len(inputs):
        raise ValueError(f"washout must lie in [0, {len(inputs)}), got {washout}")

    prev = teacher_prev_outputs(targets) if rw.w_back is not None else None
    states = drive(rw, inputs, prev_outputs=prev)
    rows = design_rows(inputs[washout:], states[washout:], None if prev is None else prev[washout:])
    return StateHarvest(design=rows, targets=targets[washout:])


def train_readout(h: StateHarvest, lam: float) -> np.ndarray:
    """Ridge solution transposed to (output_dim, features)"""
    return ridge_solve(h.design, h.targets, lam).T


def train_esn(
    rw: ReservoirWeights, inputs: Sequence, targets: Sequence, hp: HyperParams, washout: Optional[int] = None
) -> TrainedEsn:
    """
    Harvest and train in one call

    When washout is omitted, round(hp.washout_fraction * len(inputs)) leading
    steps are discarded.
    """
    if washout is None:
        washout = int(round(hp.washout_fraction * len(inputs)))
    h = harvest(rw, inputs, targets, washout)
    return TrainedEsn(reservoir=rw, w_out=train_readout(h, hp.ridge_lambda), hp=hp)


def _readout(model: TrainedEsn, u: np.ndarray, x: np.ndarray, y_prev: Optional[np.ndarray]) -> np.ndarray:
    parts = [np.ones(1), u, x]
    if y_prev is not None:
        parts.append(y_prev)
    return matvec(model.w_out, np.concatenate(parts))


def predict_teacher_forced(
    model: TrainedEsn, inputs: Sequence, teacher_outputs: Optional[Sequence] = None
) -> np.ndarray:
    """
    One-step outputs y(n+1) = W_out [1, u(n+1), x(n+1)] under the true inputs

    Args:
        model: Trained network
        inputs: T input vectors
        teacher_outputs: Optional true outputs fed through W_back; when omitted
            the model's own previous outputs are used

    Returns:
        np.ndarray: Outputs of shape (T, output_dim)
    """
    inputs = sequence_to_array(inputs, "inputs")
    rw = model.reservoir
    teacher = None if teacher_outputs is None else sequence_to_array(teacher_outputs, "teacher_outputs")
    x = np.zeros(rw.n_reservoir)
    y_prev = np.zeros(model.output_dim) if rw.feedback_enabled else None
    outputs = np.empty((len(inputs), model.output_dim))
    for t in range(len(inputs)):
        x = update_state(rw, x, inputs[t], y_prev)
        y = _readout(model, inputs[t], x, y_prev)
        outputs[t] = y
        if rw.feedback_enabled:
            y_prev = teacher[t] if teacher is not None else y
    return outputs


def predict_free_run(model: TrainedEsn, warmup_inputs: Sequence, horizon: int) -> np.ndarray:
    """
    Synchronize on warmup_inputs, then feed each prediction back as the next input

    Args:
        model: Trained network with output_dim == input_dim
        warmup_inputs: Non-empty teacher-forced prefix
        horizon: Number of predictions to return (>= 1)

    Returns:
        np.ndarray: Predictions of shape (horizon, output_dim)
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    warmup = sequence_to_array(warmup_inputs, "warmup_inputs")
    if len(warmup) == 0:
        raise ValueError("Free-run prediction needs a non-empty warmup")
    rw = model.reservoir
    if model.output_dim != rw.input_dim:
        raise ValueError(
            f"Generative mode needs output_dim == input_dim, got {model.output_dim} and {rw.input_dim}"
        )

    # y(n) during warmup is the true previous output, i.e. the current input
    prev = None
    if rw.feedback_enabled:
        prev = np.vstack([np.zeros((1, model.output_dim)), warmup[1:]])
    x = np.zeros(rw.n_reservoir)
    y = None
    for t, u in enumerate(warmup):
        y_prev = None if prev is None else prev[t]
        x = update_state(rw, x, u, y_prev)
        y = _readout(model, u, x, y_prev)

    predictions = np.empty((horizon, model.output_dim))
    predictions[0] = y
    for k in range(1, horizon):
        u = y
        y_prev = u if rw.feedback_enabled else None
        x = update_state(rw, x, u, y_prev)
        y = _readout(model, u, x, y_prev)
        predictions[k] = y
    return predictions


def free_run_batch(
    model: TrainedEsn,
    start_states: np.ndarray,
    start_inputs: np.ndarray,
    horizon: int,
    start_prev_outputs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Free-run many forecast origins at once

    Row i of start_states is the teacher-forced state after consuming
    start_inputs[i]; the first prediction is read out from it directly.

    Returns:
        np.ndarray: Predictions of shape (horizon, origins, output_dim)
    """
    rw = model.reservoir
    if model.output_dim != rw.input_dim:
        raise ValueError(
            f"Generative mode needs output_dim == input_dim, got {model.output_dim} and {rw.input_dim}"
        )
    if rw.feedback_enabled and start_prev_outputs is None:
        raise ValueError("Feedback reservoir needs start_prev_outputs")
    prev = start_prev_outputs if rw.feedback_enabled else None

    x = start_states
    y = design_rows(start_inputs, x, prev) @ model.w_out.T
    out = np.empty((horizon, len(x), model.output_dim))
    out[0] = y
    for k in range(1, horizon):
        u = y
        pre = x @ rw.w.T + u @ rw.w_in.T
        if rw.bias is not None:
            pre = pre + rw.bias
        if rw.feedback_enabled:
            prev = y
            pre = pre + prev @ rw.w_back.T
        x = np.tanh(pre)
        y = design_rows(u, x, prev) @ model.w_out.T
        out[k] = y
    return out


def trained_to_dict(model: TrainedEsn) -> Dict[str, Any]:
    """Reservoir document with the readout matrix added as w_out"""
    doc = reservoir_to_dict(model.reservoir, model.hp)
    doc["w_out"] = model.w_out.tolist()
    return doc


def trained_from_dict(doc: Dict[str, Any]) -> TrainedEsn:
    """Rebuild a trained network; the document must carry hyperparameters and w_out"""
    if "w_out" not in doc:
        raise ValueError("Model document has no 'w_out' entry")
    rw, hp = reservoir_from_dict(doc)
    if hp is None:
        raise ValueError("Model document has no hyperparameters")
    return TrainedEsn(reservoir=rw, w_out=doc["w_out"], hp=hp)


def save_model(model: TrainedEsn, path) -> Path:
    """Write the trained network as JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(trained_to_dict(model), f)
    logger.info(f"Model saved to: {path}")
    return path


def load_model(path) -> TrainedEsn:
    """Read a network written by save_model"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return trained_from_dict(doc)
