"""Time evolution under time-independent Hamiltonians (hbar = 1)."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, HermiticityError
from .linalg import DEFAULT_TOL, as_matrix, max_abs_diff, propagator
from .objects import DensityOperator, as_density

__all__ = ["Hamiltonian", "as_hamiltonian", "evolve_state", "heisenberg_projector", "heisenberg"]


class Hamiltonian:
    """Hermitian generator of free evolution."""

    def __init__(self, matrix, *, tol: float = DEFAULT_TOL.eps_hermitian):
        m = as_matrix(matrix, "Hamiltonian")
        err = max_abs_diff(m, m.conj().T)
        if err > tol:
            raise HermiticityError(f"Hamiltonian not Hermitian (error {err:.3e})")
        self.matrix = 0.5 * (m + m.conj().T)
        self.matrix.setflags(write=False)

    @classmethod
    def zero(cls, dim: int) -> "Hamiltonian":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def propagator(self, t: float) -> np.ndarray:
        return propagator(self.matrix, t)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def as_hamiltonian(h) -> Hamiltonian:
    return h if isinstance(h, Hamiltonian) else Hamiltonian(h)


def evolve_state(rho, h, t: float) -> DensityOperator:
    """Schrödinger-picture evolution ``U rho U^dagger`` with ``U = exp(-i h t)``."""
    rho, h = as_density(rho), as_hamiltonian(h)
    if rho.dim != h.dim:
        raise DimensionError(f"state dim {rho.dim} != Hamiltonian dim {h.dim}")
    u = h.propagator(t)
    return DensityOperator(u @ rho.matrix @ u.conj().T)


def heisenberg(op, h, t: float) -> np.ndarray:
    """``exp(i h t) op exp(-i h t)`` for any operator ``op``."""
    op, h = as_matrix(op, "operator"), as_hamiltonian(h)
    if op.shape[0] != h.dim:
        raise DimensionError(f"operator dim {op.shape[0]} != Hamiltonian dim {h.dim}")
    u = h.propagator(t)
    return u.conj().T @ op @ u


def heisenberg_projector(e, h, t: float, *, tol: float = 1e-9) -> np.ndarray:
    """Heisenberg-picture evolution of a spectral projector.

    Raises :class:`HermiticityError` if ``e`` is not a Hermitian idempotent
    to within ``tol``.
    """
    e = as_matrix(e, "projector")
    if max_abs_diff(e, e.conj().T) > tol or max_abs_diff(e @ e, e) > tol:
        raise HermiticityError("argument is not an orthogonal projector")
    return heisenberg(e, h, t)
