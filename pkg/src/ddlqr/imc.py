"""Internal-model controllers and reference-tracking augmentation.

An internal-model controller replicates the reference's signal class inside
the loop (an integrator for steps, a resonator for sinusoids). Filtering the
plant outputs through the controller produces measurable controller states,
and stacking them onto the plant data turns the tracking problem into a
plain state-feedback design on an augmented system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_kit import as_series
from .plant_sim import Dataset, StateSpaceModel


@dataclass
class ImcRealization:
    """State-equation realization (A_c, B_c) of an internal-model controller."""

    A_c: np.ndarray
    B_c: np.ndarray

    def __post_init__(self):
        self.A_c = np.atleast_2d(np.asarray(self.A_c, dtype=float))
        self.B_c = np.asarray(self.B_c, dtype=float).reshape(-1, 1)
        nc = self.A_c.shape[0]
        if self.A_c.shape != (nc, nc) or self.B_c.shape != (nc, 1):
            raise ValueError(
                f"inconsistent controller dimensions: A_c {self.A_c.shape}, B_c {self.B_c.shape}"
            )

    @property
    def order(self) -> int:
        return self.A_c.shape[0]


def integrator_imc() -> ImcRealization:
    """Discrete integrator: x_c(k+1) = x_c(k) + (r(k) - y(k))."""
    return ImcRealization(A_c=[[1.0]], B_c=[1.0])


def resonant_imc(omega_n: float, Ts: float) -> ImcRealization:
    """Resonant controller tuned to omega_n rad/s at sampling time Ts.

    The companion form has characteristic polynomial
    z^2 - 2 cos(omega_n Ts) z + 1, placing both poles on the unit circle at
    the reference frequency.
    """
    if Ts <= 0:
        raise ValueError("Ts must be positive")
    theta = omega_n * Ts
    if not 0.0 < theta < math.pi:
        raise ValueError(
            f"omega_n * Ts = {theta:.6g} must lie strictly inside (0, pi); "
            f"the frequency is at or above Nyquist"
        )
    return ImcRealization(A_c=[[0.0, 1.0], [-1.0, 2.0 * math.cos(theta)]], B_c=[0.0, 1.0])


def filter_imc_states(y, imc: ImcRealization) -> np.ndarray:
    """Open-loop controller states obtained by filtering plant outputs.

    Per output channel j the recursion x_c(k+1) = A_c x_c(k) - B_c y_j(k)
    runs from zero initial state (zero reference); channel blocks are stacked
    side by side, channel-major.
    """
    y = as_series(y)
    T, q = y.shape
    nc = imc.order
    out = np.zeros((T, nc * q))
    Ac, Bc = imc.A_c, imc.B_c[:, 0]
    for j in range(q):
        blk = slice(j * nc, (j + 1) * nc)
        for k in range(T - 1):
            out[k + 1, blk] = Ac @ out[k, blk] - Bc * y[k, j]
    return out


def augment_dataset(data: Dataset, imc: ImcRealization) -> Dataset:
    """Append filtered controller states to the outputs and states of a dataset."""
    xc = filter_imc_states(data.y, imc)
    return Dataset(
        u=data.u,
        y=np.hstack([data.y, xc]),
        x=np.hstack([data.x, xc]),
        sample_time=data.sample_time,
    )


def augment_model(model: StateSpaceModel, imc: ImcRealization) -> StateSpaceModel:
    """Open-loop augmented model of plant plus one controller copy per output.

    The augmented state is [x; x_c] with

        A_a = [[A, 0], [-C (x) B_c, I_q (x) A_c]],   B_a = [B; 0],
        C_a = [[C, 0], [0, I]],

    where (x) is the Kronecker product, so the controller block integrates
    -y channel-wise. Noise channels E and F carry over on the plant block.
    """
    n, p, q = model.n_states, model.n_inputs, model.n_outputs
    nc = imc.order
    na = n + nc * q
    A_a = np.zeros((na, na))
    A_a[:n, :n] = model.A
    A_a[n:, :n] = -np.kron(model.C, imc.B_c)
    A_a[n:, n:] = np.kron(np.eye(q), imc.A_c)
    B_a = np.vstack([model.B, np.zeros((nc * q, p))])
    C_a = np.zeros((q + nc * q, na))
    C_a[:q, :n] = model.C
    C_a[q:, n:] = np.eye(nc * q)
    E_a = None if model.E is None else np.vstack([model.E, np.zeros((nc * q, model.E.shape[1]))])
    F_a = None if model.F is None else np.vstack([model.F, np.zeros((nc * q, model.F.shape[1]))])
    return StateSpaceModel(A=A_a, B=B_a, C=C_a, E=E_a, F=F_a, sample_time=model.sample_time)
