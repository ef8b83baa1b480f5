"""Shared test fixtures: the demo plants and random-system samplers."""

import numpy as np

from ddlqr import Dataset, SignalSpec, StateSpaceModel, generate_signal, simulate


def two_output_model() -> StateSpaceModel:
    """Two-state, two-input, two-output regulation demo plant."""
    return StateSpaceModel(
        A=[[1.0, 0.15], [-0.2, 0.6]],
        B=[[0.04, 0.01], [0.02, -0.01]],
        C=[[1.0, 2.0], [0.0, 1.0]],
        sample_time=1.0,
    )


def scalar_model(with_noise: bool = False) -> StateSpaceModel:
    """First-order scalar demo plant, optionally with a unit state-noise channel."""
    return StateSpaceModel(
        A=[[0.14]],
        B=[[1.72]],
        C=[[1.0]],
        E=[[1.0]] if with_noise else None,
        sample_time=1.0,
    )


def prbs_dataset(model: StateSpaceModel, length: int = 1022, seed: int = 7,
                 amplitude: float = 1.0) -> Dataset:
    """Noise-free open-loop record under a PRBS excitation."""
    spec = SignalSpec(kind="prbs", length=length, amplitude=amplitude, seed=seed,
                      channels=model.n_inputs)
    return simulate(model, generate_signal(spec))


def random_stable_system(rng: np.random.Generator, n_max: int = 4, p_max: int = 2,
                         q_max: int = 2, radius: tuple = (0.3, 0.9)) -> StateSpaceModel:
    """Random stable (hence stabilizable) system with generic B and C."""
    n = int(rng.integers(1, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    q = int(rng.integers(1, q_max + 1))
    A = rng.normal(size=(n, n))
    spectral = np.abs(np.linalg.eigvals(A)).max()
    A *= rng.uniform(*radius) / max(spectral, 1e-12)
    return StateSpaceModel(A=A, B=rng.normal(size=(n, p)), C=rng.normal(size=(q, n)))
