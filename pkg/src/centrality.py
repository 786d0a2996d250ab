"""
Reservoir Centrality Measures
=============================

Treats the reservoir matrix W as a weighted directed graph and scores each
node by its signed connection strengths.

Edge convention: entry W[r, c] is the edge c -> r, because W x(n) feeds the
column-indexed source states into the row-indexed targets. Incoming strengths
of node i therefore read row i, outgoing strengths read column i. A self-loop
W[i, i] counts as both incoming and outgoing.

Measures:
    C_in  = |I+| + |I-|
    C_out = |O+| + |O-|
    C1    = (|I+| - |I-|) / (|I+| + |I-|)
    C2    = (|I+| + |O+| - |I-| - |O-|) / (|I+| + |O+| + |I-| + |O-|)
    C3    = |I+| + |O+| + |I-| + |O-|

Zero denominators (isolated nodes) give C1 = C2 = 0.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MEASURES = ("C_in", "C_out", "C1", "C2", "C3")
BALANCE_MEASURES = ("C1", "C2")


@dataclass(frozen=True, eq=False)
class SignedStrengths:
    """Per-node positive and absolute-negative strengths"""

    in_pos: np.ndarray
    in_neg: np.ndarray
    out_pos: np.ndarray
    out_neg: np.ndarray


@dataclass(frozen=True, eq=False)
class CentralityScores:
    """Scores of one measure, indexed by node"""

    measure: str
    scores: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "node_id": np.arange(len(self.scores)),
                "measure": self.measure,
                "score": self.scores,
            }
        )


def _check_square(w: np.ndarray):
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"Centrality needs a square matrix, got shape {w.shape}")


def signed_strengths(w: np.ndarray) -> SignedStrengths:
    """
    Split each node's incoming/outgoing weight sums by sign

    Args:
        w: Square reservoir matrix

    Returns:
        SignedStrengths: Four non-negative vectors of length n
    """
    _check_square(w)
    positive = np.where(w > 0, w, 0.0)
    negative = np.where(w < 0, -w, 0.0)
    return SignedStrengths(
        in_pos=positive.sum(axis=1),
        in_neg=negative.sum(axis=1),
        out_pos=positive.sum(axis=0),
        out_neg=negative.sum(axis=0),
    )


def _balance(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros_like(numerator)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def centrality(w: np.ndarray, measure: str) -> CentralityScores:
    """
    Score every node of w with one measure

    Args:
        w: Square reservoir matrix
        measure: One of MEASURES

    Returns:
        CentralityScores
    """
    if measure not in MEASURES:
        raise ValueError(f"Unknown centrality measure '{measure}'; expected one of {', '.join(MEASURES)}")
    s = signed_strengths(w)

    if measure == "C_in":
        scores = s.in_pos + s.in_neg
    elif measure == "C_out":
        scores = s.out_pos + s.out_neg
    elif measure == "C1":
        scores = _balance(s.in_pos - s.in_neg, s.in_pos + s.in_neg)
    elif measure == "C2":
        scores = _balance(
            s.in_pos + s.out_pos - s.in_neg - s.out_neg,
            s.in_pos + s.out_pos + s.in_neg + s.out_neg,
        )
    else:
        scores = s.in_pos + s.out_pos + s.in_neg + s.out_neg

    return CentralityScores(measure=measure, scores=scores)


def rank_nodes(
    scores: CentralityScores, exclude: Optional[Iterable[int]] = None, by_magnitude: bool = False
) -> List[int]:
    """
    Order nodes for removal, lowest score first

    Ties break by ascending node index. With by_magnitude, C1/C2 are ranked
    by |score| so strongly inhibitory nodes are not treated as unimportant.

    Args:
        scores: Scores to rank
        exclude: Node ids left out of the ranking
        by_magnitude: Rank balance measures by absolute value

    Returns:
        list: Node ids, first pruning candidate first
    """
    key = scores.scores
    if by_magnitude and scores.measure in BALANCE_MEASURES:
        key = np.abs(key)
    index = np.arange(len(key))
    order = np.lexsort((index, key))
    skip = set(exclude) if exclude is not None else set()
    return [int(i) for i in order if int(i) not in skip]


def score_table(w: np.ndarray, measures: Sequence[str] = MEASURES) -> pd.DataFrame:
    """Long-format table (node_id, measure, score) for several measures"""
    frames = [centrality(w, m).to_frame() for m in measures]
    return pd.concat(frames, ignore_index=True)


def export_scores(w: np.ndarray, path, measures: Sequence[str] = MEASURES) -> Path:
    """Write the score table to CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    score_table(w, measures).to_csv(path, index=False, float_format="%.12g")
    logger.info(f"Centrality scores saved to: {path}")
    return path
