"""Markov-parameter estimation from batch data via a lifted output predictor.

The data are arranged into past/future block-Hankel matrices; a least-squares
predictor maps [past inputs; past outputs; future inputs] to future outputs,
and the impulse-response (Markov parameter) blocks sit in the predictor's
rightmost columns as a strictly-lower block-Toeplitz factor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .matrix_kit import DEFAULT_PINV_TOL, block_hankel, block_toeplitz_strict_lower, pinv
from .plant_sim import Dataset, StateSpaceModel

DEFAULT_RANK_TOL = 1e-8


@dataclass
class DataMatrices:
    """Past/future Hankel partitions of a dataset at one depth.

    ``u_past``/``y_past`` start at sample 0, ``u_future``/``y_future`` at
    sample ``depth``; all four share ``width`` columns. ``regressor`` stacks
    [u_past; y_past; u_future].
    """

    u_past: np.ndarray
    y_past: np.ndarray
    u_future: np.ndarray
    y_future: np.ndarray
    depth: int
    width: int
    n_inputs: int
    n_outputs: int

    @property
    def regressor(self) -> np.ndarray:
        return np.vstack([self.u_past, self.y_past, self.u_future])


@dataclass
class MarkovEstimate:
    """Least-squares predictor and the Markov parameters extracted from it.

    ``toeplitz`` is the structure-enforced strictly-lower block-Toeplitz
    matrix of the ``blocks`` (depth-1 of them, each q x p); ``predictor`` is
    the raw unstructured least-squares solution kept for diagnostics.
    """

    predictor: np.ndarray
    toeplitz: np.ndarray
    blocks: List[np.ndarray]
    depth: int
    input_rank: int = 0
    regressor_rank: int = 0

    def stacked(self, count: Optional[int] = None) -> np.ndarray:
        """Column-stack the first ``count`` Markov blocks into a (q*count, p) matrix."""
        count = len(self.blocks) if count is None else count
        if count > len(self.blocks):
            raise ValueError(f"only {len(self.blocks)} blocks available, requested {count}")
        return np.vstack(self.blocks[:count])


def build_data_matrices(data: Dataset, depth: int, width: Optional[int] = None) -> DataMatrices:
    """Split a dataset into past/future input/output Hankel matrices.

    ``width`` defaults to the largest value the record supports,
    T - 2*depth + 1. The generic solvability condition
    width >= (2p + q) * depth is enforced; the stricter single-output
    guidance width >= 3*q*depth only warns.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    T = data.n_samples
    max_width = T - 2 * depth + 1
    if max_width < 1:
        raise ValueError(
            f"need T >= 2*depth + width - 1: T={T} cannot support any columns "
            f"at depth {depth} (need at least {2 * depth} samples)"
        )
    if width is None:
        width = max_width
    if width < 1 or width > max_width:
        raise ValueError(
            f"need T >= 2*depth + width - 1: T={T}, depth={depth} allows width "
            f"1..{max_width}, got {width}"
        )
    p, q = data.n_inputs, data.n_outputs
    if width < 3 * q * depth:
        warnings.warn(
            f"width {width} is below the guidance 3*q*depth = {3 * q * depth}; "
            "estimates may be poorly conditioned",
            stacklevel=2,
        )
    return DataMatrices(
        u_past=block_hankel(data.u, 0, depth, width),
        y_past=block_hankel(data.y, 0, depth, width),
        u_future=block_hankel(data.u, depth, depth, width),
        y_future=block_hankel(data.y, depth, depth, width),
        depth=depth,
        width=width,
        n_inputs=p,
        n_outputs=q,
    )


def _numerical_rank(m: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s >= tol * s[0]))


def estimate_predictor(
    dm: DataMatrices,
    structure: str = "average",
    rank_tol: float = DEFAULT_RANK_TOL,
    pinv_tol: float = DEFAULT_PINV_TOL,
) -> MarkovEstimate:
    """Solve the lifted least-squares problem and extract Markov parameters.

    The predictor is y_future = W [u_past; y_past; u_future] solved through
    the pseudo-inverse; the rightmost p*depth columns of W carry the
    Markov-parameter Toeplitz factor. ``structure`` chooses how the
    strictly-lower Toeplitz structure is enforced on that factor:

    * ``"average"``: average each block sub-diagonal (reduces noise),
    * ``"first-column"``: read blocks from the first block column only.

    Excitation is checked on the stacked input Hankel [u_past; u_future]:
    together with a full-row-rank state snapshot matrix this guarantees the
    Toeplitz factor is uniquely determined even though the full regressor is
    rank-deficient on noise-free data (past outputs are linear in past inputs
    and states).
    """
    if structure not in ("average", "first-column"):
        raise ValueError(f"structure must be 'average' or 'first-column', got {structure!r}")
    d, L = dm.depth, dm.width
    p, q = dm.n_inputs, dm.n_outputs
    min_width = (2 * p + q) * d
    if L < min_width:
        raise ValueError(
            f"width {L} is below the regressor row count {min_width}; "
            f"the least-squares problem cannot determine the predictor"
        )
    inputs = np.vstack([dm.u_past, dm.u_future])
    input_rank = _numerical_rank(inputs, rank_tol)
    if input_rank < 2 * p * d:
        raise ValueError(
            f"insufficient excitation: stacked input Hankel has numerical rank "
            f"{input_rank}, need {2 * p * d} (persistently exciting input of order {2 * d})"
        )
    phi = dm.regressor
    W = dm.y_future @ pinv(phi, tol=pinv_tol)
    raw = W[:, -p * d:]

    blocks: List[np.ndarray] = []
    if structure == "average":
        for k in range(d - 1):
            # sub-diagonal k holds block copies at positions (i+k+1, i)
            copies = [
                raw[(i + k + 1) * q:(i + k + 2) * q, i * p:(i + 1) * p]
                for i in range(d - 1 - k)
            ]
            blocks.append(np.mean(copies, axis=0))
    else:
        for k in range(d - 1):
            blocks.append(raw[(k + 1) * q:(k + 2) * q, 0:p])

    S = block_toeplitz_strict_lower(blocks, d, block_shape=(q, p))
    return MarkovEstimate(
        predictor=W,
        toeplitz=S,
        blocks=blocks,
        depth=d,
        input_rank=input_rank,
        regressor_rank=_numerical_rank(phi, rank_tol),
    )


def true_markov(model: StateSpaceModel, count: int) -> List[np.ndarray]:
    """Model-based impulse-response blocks C A^(i-1) B for i = 1..count."""
    if count < 0:
        raise ValueError("count must be >= 0")
    blocks = []
    power = np.eye(model.n_states)
    for _ in range(count):
        blocks.append(model.C @ power @ model.B)
        power = model.A @ power
    return blocks
