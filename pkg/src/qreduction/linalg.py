"""Dense complex matrix kernel.

Everything here works on plain square ``numpy`` arrays. Composite spaces are
ordered with the left factor varying slowest, i.e. ``np.kron`` ordering, so the
operator ``a (x) b`` acts on ``H_a (x) H_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DimensionError, HermiticityError, ParameterError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "tensor_product",
    "partial_trace",
    "hermitian_spectral",
    "propagator",
    "adjoint",
    "trace",
    "is_hermitian",
    "is_unitary",
    "is_psd",
    "min_eigenvalue",
    "max_abs_diff",
    "commutator",
    "ket",
    "projector_onto",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used by validation and eigenvalue grouping."""

    eps_hermitian: float = 1e-9
    eps_prob: float = 1e-12
    eps_eig_group: float = 1e-9

    def __post_init__(self):
        for name in ("eps_hermitian", "eps_prob", "eps_eig_group"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-3):
                raise ParameterError(f"{name} must lie in (0, 1e-3), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite, square complex array."""
    arr = np.asarray(getattr(m, "matrix", m), dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite entries")
    return arr


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def partial_trace(m, dim_first: int, dim_second: int, traced: str = "first") -> np.ndarray:
    """Trace out one factor of an operator on ``C^dim_first (x) C^dim_second``.

    ``traced`` is ``"first"`` or ``"second"`` and names the factor removed.
    """
    m = as_matrix(m)
    if dim_first < 1 or dim_second < 1 or m.shape[0] != dim_first * dim_second:
        raise DimensionError(
            f"cannot split a {m.shape[0]}-dim operator into {dim_first} x {dim_second}"
        )
    blocks = m.reshape(dim_first, dim_second, dim_first, dim_second)
    if traced == "first":
        return np.einsum("ijik->jk", blocks)
    if traced == "second":
        return np.einsum("ijkj->ik", blocks)
    raise ParameterError(f"traced must be 'first' or 'second', got {traced!r}")


def adjoint(m) -> np.ndarray:
    return as_matrix(m).conj().T


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def max_abs_diff(a, b) -> float:
    a = np.asarray(getattr(a, "matrix", a), dtype=complex)
    b = np.asarray(getattr(b, "matrix", b), dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def is_hermitian(m, tol: float = DEFAULT_TOL.eps_hermitian) -> bool:
    m = as_matrix(m)
    return max_abs_diff(m, m.conj().T) <= tol


def is_unitary(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    return max_abs_diff(m.conj().T @ m, np.eye(m.shape[0])) <= tol


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    m = as_matrix(m)
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def is_psd(m, tol: float = 1e-9) -> bool:
    m = as_matrix(m)
    return is_hermitian(m, max(tol, DEFAULT_TOL.eps_hermitian)) and min_eigenvalue(m) >= -tol


def _check_hermitian(m: np.ndarray, tol: Tolerance) -> np.ndarray:
    err = max_abs_diff(m, m.conj().T)
    if err > tol.eps_hermitian:
        raise HermiticityError(f"matrix is not Hermitian (max |m - m^dagger| = {err:.3e})")
    return 0.5 * (m + m.conj().T)


def hermitian_spectral(m, tol: Tolerance = DEFAULT_TOL) -> List[Tuple[float, np.ndarray]]:
    """Spectral resolution of a Hermitian matrix.

    Returns ``[(eigenvalue, projector), ...]`` with distinct eigenvalues in
    ascending order. Eigenvalues closer than ``tol.eps_eig_group`` to their
    neighbour are merged into one degenerate group whose label is the group
    mean.
    """
    h = _check_hermitian(as_matrix(m), tol)
    evals, evecs = np.linalg.eigh(h)
    groups: List[List[int]] = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[groups[-1][-1]] <= tol.eps_eig_group:
            groups[-1].append(i)
        else:
            groups.append([i])
    spectrum = []
    for idx in groups:
        vecs = evecs[:, idx]
        spectrum.append((float(np.mean(evals[idx])), vecs @ vecs.conj().T))
    return spectrum


def propagator(h, t: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` (hbar = 1), built from its spectrum."""
    spectrum = hermitian_spectral(h, tol)
    out = np.zeros_like(spectrum[0][1])
    for value, proj in spectrum:
        out += np.exp(-1j * value * t) * proj
    return out


def ket(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ParameterError("ket must be a non-empty finite vector")
    return v


def projector_onto(v) -> np.ndarray:
    v = ket(v)
    return np.outer(v, v.conj())
