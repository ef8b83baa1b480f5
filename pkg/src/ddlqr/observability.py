"""Extended-observability-matrix estimation in measured state coordinates.

Two estimators: one subtracts the estimated input Toeplitz contribution from
the past outputs and regresses on the state snapshots; the other projects the
past-input row space away first, which removes the need for the Toeplitz
estimate altogether.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .matrix_kit import DEFAULT_PINV_TOL, pinv
from .plant_sim import Dataset, StateSpaceModel

ALGORITHMS = ("alg1", "alg2")


@dataclass
class ObservabilityEstimate:
    """Estimated extended observability matrix and its one-block-shifted form.

    ``matrix`` stacks the blocks C, CA, ..., CA^(depth-1); ``shifted`` drops
    the first block row, so it stacks CA, ..., CA^(depth-1). ``residual`` is
    the Frobenius fit residual of the defining matrix equation.
    """

    matrix: np.ndarray
    shifted: np.ndarray
    algorithm: str
    depth: int
    residual: float = 0.0


def state_snapshot(data: Dataset, width: int) -> np.ndarray:
    """First ``width`` state samples as columns of an (n, width) matrix."""
    if width < 1 or width > data.n_samples:
        raise ValueError(f"width must be in 1..{data.n_samples}, got {width}")
    return data.x[:width].T


def true_observability(model: StateSpaceModel, depth: int) -> np.ndarray:
    """Model-based stack of C A^i for i = 0..depth-1 (test oracle)."""
    rows = []
    power = np.eye(model.n_states)
    for _ in range(depth):
        rows.append(model.C @ power)
        power = power @ model.A
    return np.vstack(rows)


def drop_first_block_row(obs: np.ndarray, q: int) -> np.ndarray:
    """Remove the first q rows, shifting the observability stack by one power of A."""
    obs = np.atleast_2d(np.asarray(obs, dtype=float))
    if q < 1:
        raise ValueError("q must be >= 1")
    if obs.shape[0] < 2 * q:
        raise ValueError(
            f"observability matrix has {obs.shape[0]} rows; need at least {2 * q} "
            f"to drop one block row of {q}"
        )
    return obs[q:, :]


def _right_pinv(m: np.ndarray, tol: float, what: str) -> np.ndarray:
    """Pseudo-inverse of a wide full-row-rank matrix, raising when rank drops."""
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] < tol * s[0]:
        raise ValueError(f"{what}: numerical row rank below {m.shape[0]}")
    return (vt.T / s) @ u.T


def _block_size(y_past: np.ndarray, depth: int) -> int:
    if depth < 1 or y_past.shape[0] % depth != 0:
        raise ValueError(f"y_past row count {y_past.shape[0]} is not a multiple of depth {depth}")
    return y_past.shape[0] // depth


def estimate_obs_alg1(
    y_past: np.ndarray,
    u_past: np.ndarray,
    s_hat: np.ndarray,
    x_snapshot: np.ndarray,
    depth: int,
    tol: float = DEFAULT_PINV_TOL,
) -> ObservabilityEstimate:
    """Estimate the observability matrix by Toeplitz subtraction.

    Solves y_past = O x_snapshot + s_hat u_past for O in least squares:
    O = (y_past - s_hat u_past) x_snapshot^+.
    """
    q = _block_size(y_past, depth)
    if s_hat.shape[0] != y_past.shape[0] or s_hat.shape[1] != u_past.shape[0]:
        raise ValueError(
            f"Toeplitz factor shape {s_hat.shape} does not match y_past rows "
            f"{y_past.shape[0]} and u_past rows {u_past.shape[0]}"
        )
    if not (y_past.shape[1] == u_past.shape[1] == x_snapshot.shape[1]):
        raise ValueError("y_past, u_past and the state snapshot must share their width")
    try:
        x_pinv = _right_pinv(x_snapshot, tol, "state snapshot")
    except ValueError as exc:
        raise ValueError(f"states not sufficiently excited: {exc}") from exc
    rhs = y_past - s_hat @ u_past
    obs = rhs @ x_pinv
    residual = float(np.linalg.norm(rhs - obs @ x_snapshot))
    return ObservabilityEstimate(
        matrix=obs,
        shifted=drop_first_block_row(obs, q),
        algorithm="alg1",
        depth=depth,
        residual=residual,
    )


def orthogonal_projector(u_past: np.ndarray, tol: float = DEFAULT_PINV_TOL) -> np.ndarray:
    """Projector onto the orthogonal complement of the rows of u_past.

    Returns the width x width matrix I - u_past' (u_past u_past')^-1 u_past,
    falling back to the pseudo-inverse form when the Gram matrix is singular.
    """
    u_past = np.atleast_2d(np.asarray(u_past, dtype=float))
    L = u_past.shape[1]
    gram = u_past @ u_past.T
    s = np.linalg.svd(gram, compute_uv=False)
    if s.size and s[0] > 0 and s[-1] >= tol * s[0]:
        coeff = np.linalg.solve(gram, u_past)
    else:
        warnings.warn("input Hankel Gram matrix is singular; using pseudo-inverse projector",
                      stacklevel=2)
        coeff = pinv(gram, tol) @ u_past
    return np.eye(L) - u_past.T @ coeff


def estimate_obs_alg2(
    y_past: np.ndarray,
    u_past: np.ndarray,
    x_snapshot: np.ndarray,
    depth: int,
    tol: float = DEFAULT_PINV_TOL,
) -> ObservabilityEstimate:
    """Estimate the observability matrix by projecting the inputs away.

    Applies the orthogonal-complement projector of the past-input rows to
    both sides of y_past = O x_snapshot + S u_past, annihilating the unknown
    Toeplitz term, then solves O = (y_past P) (x_snapshot P)^+. The projector
    is applied implicitly (M P = M - (M u_past^+) u_past) to avoid forming
    the width x width matrix.
    """
    q = _block_size(y_past, depth)
    if not (y_past.shape[1] == u_past.shape[1] == x_snapshot.shape[1]):
        raise ValueError("y_past, u_past and the state snapshot must share their width")
    u_pinv = pinv(u_past, tol)
    y_proj = y_past - (y_past @ u_pinv) @ u_past
    x_proj = x_snapshot - (x_snapshot @ u_pinv) @ u_past
    try:
        xp = _right_pinv(x_proj, tol, "projected state snapshot (X U_po)")
    except ValueError as exc:
        raise ValueError(f"states not sufficiently excited: {exc}") from exc
    obs = y_proj @ xp
    residual = float(np.linalg.norm(y_proj - obs @ x_proj))
    return ObservabilityEstimate(
        matrix=obs,
        shifted=drop_first_block_row(obs, q),
        algorithm="alg2",
        depth=depth,
        residual=residual,
    )
