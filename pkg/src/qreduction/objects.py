"""States, observables, POVMs and instruments on finite-dimensional spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionError,
    HermiticityError,
    NormalizationError,
    ParameterError,
    PositivityError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    hermitian_spectral,
    ket,
    max_abs_diff,
    min_eigenvalue,
)

__all__ = [
    "StateVector",
    "DensityOperator",
    "Observable",
    "Povm",
    "Instrument",
    "BranchOutcome",
    "as_density",
    "as_observable",
    "pure_state",
    "mix",
    "apply_instrument",
    "choi_matrix",
    "commutes",
    "purity",
]

STATE_TOL = 1e-9
KET_NORM_TOL = 1e-10
CHOI_TOL = 1e-8


class StateVector:
    """A normalized ket."""

    def __init__(self, amplitudes, *, normalize: bool = False):
        v = ket(amplitudes)
        norm = np.linalg.norm(v)
        if normalize:
            if norm == 0:
                raise NormalizationError("cannot normalize the zero vector")
            v = v / norm
        elif abs(norm - 1.0) > KET_NORM_TOL:
            raise NormalizationError(f"state vector has norm {norm:.12g}, expected 1")
        self.amplitudes = v
        self.amplitudes.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector({self.amplitudes.tolist()!r})"


class DensityOperator:
    """Trace-one positive Hermitian matrix.

    Validation tolerances are absolute: Hermiticity, unit trace and the
    smallest eigenvalue are each checked against ``tol`` (default 1e-9). The
    stored matrix is the Hermitian part of the input.
    """

    def __init__(self, matrix, *, tol: float = STATE_TOL):
        m = as_matrix(matrix, "density operator")
        herm_err = max_abs_diff(m, m.conj().T)
        if herm_err > tol:
            raise HermiticityError(f"density operator not Hermitian (error {herm_err:.3e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise NormalizationError(f"density operator has trace {tr:.12g}, expected 1")
        lowest = min_eigenvalue(m)
        if lowest < -tol:
            raise PositivityError(f"density operator has negative eigenvalue {lowest:.3e}")
        self.matrix = m
        self.matrix.setflags(write=False)

    @classmethod
    def from_unnormalized(cls, m) -> "DensityOperator":
        """Normalize a positive operator by its trace.

        Rounding noise is amplified by ``1/trace``, so the validation
        tolerance is widened by the same factor.
        """
        m = np.asarray(m, dtype=complex)
        tr = float(np.trace(m).real)
        if tr <= 0:
            raise NormalizationError(f"cannot normalize an operator of trace {tr:.3e}")
        return cls(m / tr, tol=max(STATE_TOL, 1e-13 / tr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityOperator(dim={self.dim})"


def as_density(rho) -> DensityOperator:
    if isinstance(rho, DensityOperator):
        return rho
    if isinstance(rho, StateVector):
        return pure_state(rho)
    return DensityOperator(rho)


def pure_state(psi) -> DensityOperator:
    """``|psi><psi|`` for a normalized ket."""
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    v = psi.amplitudes
    return DensityOperator(np.outer(v, v.conj()))


def mix(rho1, rho2, alpha: float) -> DensityOperator:
    """Convex combination ``alpha*rho1 + (1-alpha)*rho2`` with ``0 < alpha < 1``."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"mixing weight must satisfy 0 < alpha < 1, got {alpha!r}")
    r1, r2 = as_density(rho1), as_density(rho2)
    if r1.dim != r2.dim:
        raise DimensionError(f"cannot mix states of dims {r1.dim} and {r2.dim}")
    return DensityOperator(alpha * r1.matrix + (1.0 - alpha) * r2.matrix)


def purity(rho) -> float:
    m = as_density(rho).matrix
    return float(np.trace(m @ m).real)


class Observable:
    """Hermitian operator together with its spectral measure.

    ``spectrum`` is a list of ``(outcome, projector)`` with outcomes strictly
    ascending. It is computed from ``matrix`` unless given explicitly, in which
    case the projectors are checked and ``matrix`` is rebuilt from them.
    """

    def __init__(self, matrix=None, *, spectrum=None, tol: Tolerance = DEFAULT_TOL):
        self.tol = tol
        if spectrum is None:
            if matrix is None:
                raise ParameterError("need a matrix or a spectrum")
            self.matrix = as_matrix(matrix, "observable")
            self.spectrum = hermitian_spectral(self.matrix, tol)
            self.matrix = 0.5 * (self.matrix + self.matrix.conj().T)
        else:
            self.spectrum = _checked_spectrum(spectrum, tol)
            self.matrix = sum(a * e for a, e in self.spectrum)
            if matrix is not None:
                err = max_abs_diff(as_matrix(matrix), self.matrix)
                if err > 1e-9:
                    raise ParameterError(f"matrix disagrees with spectrum by {err:.3e}")

    @classmethod
    def from_spectrum(cls, pairs, tol: Tolerance = DEFAULT_TOL) -> "Observable":
        return cls(spectrum=pairs, tol=tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def labels(self) -> np.ndarray:
        return np.array([a for a, _ in self.spectrum])

    @property
    def projectors(self) -> List[np.ndarray]:
        return [e for _, e in self.spectrum]

    def index_of(self, outcome: float) -> Optional[int]:
        for i, (a, _) in enumerate(self.spectrum):
            if abs(a - outcome) <= self.tol.eps_eig_group:
                return i
        return None

    def projector(self, outcome: float) -> np.ndarray:
        """``E(outcome)``; the zero matrix when ``outcome`` is not an eigenvalue."""
        i = self.index_of(outcome)
        if i is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.spectrum[i][1]

    def is_nondegenerate(self) -> bool:
        return len(self.spectrum) == self.dim

    def eigenvectors(self) -> List[np.ndarray]:
        """One unit eigenvector per outcome, for nondegenerate observables.

        The phase is fixed by making the largest-magnitude component real and
        positive, so diagonal observables give standard basis vectors.
        """
        vecs = []
        for _, e in self.spectrum:
            j = int(np.argmax(np.real(np.diag(e))))
            vecs.append(e[:, j] / np.sqrt(e[j, j].real))
        return vecs

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"Observable(labels={self.labels.tolist()!r})"


def _checked_spectrum(pairs, tol: Tolerance):
    pairs = sorted(((float(a), as_matrix(e, "projector")) for a, e in pairs), key=lambda p: p[0])
    if not pairs:
        raise ParameterError("empty spectrum")
    dim = pairs[0][1].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for i, (a, e) in enumerate(pairs):
        if e.shape[0] != dim:
            raise DimensionError("projectors have different dimensions")
        if i and a - pairs[i - 1][0] <= tol.eps_eig_group:
            raise ParameterError(f"outcome {a} repeated in spectrum")
        if max_abs_diff(e, e.conj().T) > 1e-9 or max_abs_diff(e @ e, e) > 1e-9:
            raise ParameterError(f"spectral element for outcome {a} is not a projector")
        total += e
    if max_abs_diff(total, np.eye(dim)) > 1e-9:
        raise ParameterError("spectral projectors do not resolve the identity")
    return pairs


def as_observable(a) -> Observable:
    return a if isinstance(a, Observable) else Observable(a)


def commutes(a, b, tol: float = 1e-9) -> bool:
    """True when ``max |AB - BA| <= tol``."""
    a = getattr(a, "matrix", a)
    b = getattr(b, "matrix", b)
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return max_abs_diff(a @ b, b @ a) <= tol


class Povm:
    """Labelled effects ``{(label, F)}`` with each ``F >= 0`` and ``sum F = 1``."""

    def __init__(self, effects: Iterable[Tuple[float, np.ndarray]], *, tol: float = 1e-9):
        self.effects = [(float(lbl), as_matrix(f, "effect")) for lbl, f in effects]
        if not self.effects:
            raise ParameterError("POVM needs at least one effect")
        dim = self.effects[0][1].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for lbl, f in self.effects:
            if f.shape[0] != dim:
                raise DimensionError("effects have different dimensions")
            if max_abs_diff(f, f.conj().T) > tol:
                raise HermiticityError(f"effect {lbl} is not Hermitian")
            if min_eigenvalue(f) < -tol:
                raise PositivityError(f"effect {lbl} is not positive")
            total += f
        err = max_abs_diff(total, np.eye(dim))
        if err > tol:
            raise NormalizationError(f"effects sum to identity only within {err:.3e}")

    @property
    def dim(self) -> int:
        return self.effects[0][1].shape[0]

    def probabilities(self, rho) -> np.ndarray:
        m = as_density(rho).matrix
        return np.array([np.trace(f @ m).real for _, f in self.effects])


def choi_matrix(kraus_ops: Sequence) -> np.ndarray:
    """Choi matrix ``sum_k (K (x) 1)|W><W|(K (x) 1)^dagger``, ``|W> = sum_i |i>|i>``.

    Positive semidefinite exactly when the map ``rho -> sum K rho K^dagger``
    is completely positive.
    """
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    if not ops:
        raise DimensionError("need at least one Kraus operator")
    shape = ops[0].shape
    if len(shape) != 2 or any(k.shape != shape for k in ops):
        raise DimensionError("Kraus operators must share one 2-D shape")
    d_out, d_in = shape
    choi = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for k in ops:
        # (K (x) 1)|W> has entry K[j, i] at position j*d_in + i
        v = k.reshape(-1)
        choi += np.outer(v, v.conj())
    return choi


class Instrument:
    """Outcome-labelled family of CP maps, each stored as a list of Kraus operators.

    On construction the branch Choi matrices are checked to be PSD (to 1e-8)
    and the total ``sum_{a,k} K^dagger K`` to equal the identity (to 1e-9).
    """

    def __init__(self, branches, *, tol: float = 1e-9):
        self.branches: List[Tuple[float, List[np.ndarray]]] = []
        for label, ops in branches:
            ops = [np.asarray(k, dtype=complex) for k in ops]
            self.branches.append((float(label), ops))
        if not self.branches:
            raise ParameterError("instrument needs at least one branch")
        shapes = {k.shape for _, ops in self.branches for k in ops}
        if len(shapes) != 1:
            raise DimensionError(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
        (self.dim_out, self.dim_in), = shapes
        for label, ops in self.branches:
            lowest = min_eigenvalue(choi_matrix(ops))
            if lowest < -CHOI_TOL:
                raise PositivityError(f"branch {label}: Choi matrix eigenvalue {lowest:.3e}")
        err = self.normalization_error()
        if err > tol:
            raise NormalizationError(f"sum of K^dagger K differs from identity by {err:.3e}")

    @property
    def labels(self) -> np.ndarray:
        return np.array([lbl for lbl, _ in self.branches])

    def normalization_error(self) -> float:
        total = sum(k.conj().T @ k for _, ops in self.branches for k in ops)
        return max_abs_diff(total, np.eye(self.dim_in))

    def choi_min_eigenvalues(self) -> List[float]:
        return [min_eigenvalue(choi_matrix(ops)) for _, ops in self.branches]

    def branch_output(self, index: int, rho) -> np.ndarray:
        """Unnormalized ``sum_k K rho K^dagger`` for branch ``index``."""
        m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
        return sum(k @ m @ k.conj().T for k in self.branches[index][1])

    def povm(self) -> Povm:
        return Povm(
            (lbl, sum(k.conj().T @ k for k in ops)) for lbl, ops in self.branches
        )


@dataclass(frozen=True)
class BranchOutcome:
    label: float
    probability: float
    post_state: Optional[DensityOperator]


def apply_instrument(inst: Instrument, rho, *, eps_prob: float = DEFAULT_TOL.eps_prob):
    """Run every branch of ``inst`` on ``rho``.

    Returns one :class:`BranchOutcome` per branch. Branches whose probability
    is at most ``eps_prob`` carry ``post_state=None``.
    """
    rho = as_density(rho)
    if rho.dim != inst.dim_in:
        raise DimensionError(f"instrument acts on dim {inst.dim_in}, state has dim {rho.dim}")
    results = []
    for i, (label, _) in enumerate(inst.branches):
        out = inst.branch_output(i, rho)
        p = float(np.trace(out).real)
        post = DensityOperator.from_unnormalized(out) if p > eps_prob else None
        results.append(BranchOutcome(label, p, post))
    return results
