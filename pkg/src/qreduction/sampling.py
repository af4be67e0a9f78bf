"""Random states, operators and measurement setups for property sweeps.

All samplers take a ``numpy.random.Generator`` so sweeps are reproducible
from a single seed.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dynamics import Hamiltonian
from .local import LocalSetup
from .model import MeasurementModel, TransducerSpec, build_transducer
from .objects import DensityOperator, Observable, StateVector


def random_ket(dim: int, rng: np.random.Generator) -> StateVector:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v, normalize=True)


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Random mixed state ``G G^dagger / Tr`` with ``G`` a ``dim x rank`` Ginibre matrix."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase correction of Mezzadri."""
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_observable(dim: int, rng: np.random.Generator, levels: Optional[int] = None) -> Observable:
    """Observable with a Haar-random eigenbasis and well separated eigenvalues.

    ``levels < dim`` gives a degenerate observable with that many distinct
    outcomes.
    """
    levels = dim if levels is None else levels
    values = np.sort(rng.choice(np.arange(-6, 7), size=levels, replace=False)).astype(float)
    diag = np.concatenate([values, rng.choice(values, size=dim - levels)])
    u = random_unitary(dim, rng)
    return Observable(u @ np.diag(diag) @ u.conj().T)


def random_transducer_spec(
    object_dim: int,
    apparatus_dim: int,
    rng: np.random.Generator,
    *,
    projective: bool = False,
    measured: Optional[Observable] = None,
) -> TransducerSpec:
    """Random pointer basis, apparatus ready state and (unless ``projective``) post-states."""
    if apparatus_dim < object_dim:
        raise ValueError("apparatus must have room for one pointer per outcome")
    measured = random_observable(object_dim, rng) if measured is None else measured
    frame = random_unitary(apparatus_dim, rng)
    pointers = [StateVector(frame[:, n]) for n in range(object_dim)]
    xi = random_ket(apparatus_dim, rng)
    posts = None if projective else [random_ket(object_dim, rng) for _ in range(object_dim)]
    return TransducerSpec(measured, xi, pointers, posts)


def random_transducer(object_dim, apparatus_dim, rng, **kwargs) -> MeasurementModel:
    return build_transducer(random_transducer_spec(object_dim, apparatus_dim, rng, **kwargs))


def random_local_setup(
    rng: np.random.Generator,
    *,
    d1: Optional[int] = None,
    d2: Optional[int] = None,
    apparatus_dim: Optional[int] = None,
    t_max: float = 5.0,
    projective: Optional[bool] = None,
) -> LocalSetup:
    """Random instance of the two-system arrangement.

    Dimensions default to ``2 <= d1, d2 <= 3`` and ``d1 <= apparatus_dim <= 4``;
    times satisfy ``0 <= t1 < t1 + dt <= t2 <= t_max``.
    """
    d1 = int(rng.integers(2, 4)) if d1 is None else d1
    d2 = int(rng.integers(2, 4)) if d2 is None else d2
    apparatus_dim = int(rng.integers(d1, 5)) if apparatus_dim is None else apparatus_dim
    projective = bool(rng.integers(0, 2)) if projective is None else projective
    a_obs = random_observable(d1, rng)
    model = random_transducer(d1, apparatus_dim, rng, projective=projective, measured=a_obs)
    t1, t_end, t2 = np.sort(rng.uniform(0.0, t_max, size=3))
    return LocalSetup(
        h1=Hamiltonian(random_hermitian(d1, rng)),
        h2=Hamiltonian(random_hermitian(d2, rng)),
        model=model,
        a_obs=a_obs,
        b_obs=random_observable(d2, rng),
        t1=float(t1),
        dt=float(t_end - t1),
        t2=float(t2),
        rho0=random_density(d1 * d2, rng),
    )
