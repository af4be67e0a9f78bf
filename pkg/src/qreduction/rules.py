"""Classical Bayes updating and the textbook quantum measurement rules.

These are the reference semantics: Born probabilities, the projection
postulate, joint statistics of successive projective measurements and of
commuting observables. The indirect-measurement code in :mod:`.model` and
:mod:`.local` is checked against them.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import Hamiltonian, as_hamiltonian
from .errors import CommutativityError, ConditioningError, DimensionError, ParameterError
from .linalg import DEFAULT_TOL
from .objects import DensityOperator, as_density, as_observable, commutes

__all__ = [
    "OutcomeDistribution",
    "JointTable",
    "expectation",
    "bayes_prior",
    "bayes_posterior",
    "born_distribution",
    "projection_postulate_update",
    "successive_joint",
    "commuting_joint",
    "LABEL_TOL",
]

LABEL_TOL = 1e-9


def expectation(op: np.ndarray, m: np.ndarray) -> float:
    """``Re Tr[op m]`` without forming the product matrix."""
    return float(np.einsum("ij,ji->", op, m).real)


def _merge_labels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    merged: List[float] = []
    for x in sorted(np.concatenate([a, b])):
        if not merged or x - merged[-1] > LABEL_TOL:
            merged.append(float(x))
    return np.array(merged)


def _scatter_index(labels: np.ndarray, onto: np.ndarray) -> np.ndarray:
    return np.array([int(np.argmin(np.abs(onto - x))) for x in labels], dtype=int)


class OutcomeDistribution:
    """Probabilities over real outcome labels, labels strictly ascending."""

    def __init__(self, labels, probs, *, tol: float = 1e-9):
        self.labels = np.asarray(labels, dtype=float).reshape(-1)
        self.probs = np.asarray(probs, dtype=float).reshape(-1)
        if self.labels.shape != self.probs.shape:
            raise DimensionError("labels and probabilities differ in length")
        if np.any(np.diff(self.labels) <= 0):
            raise ParameterError("outcome labels must be strictly ascending")
        if np.any(self.probs < -DEFAULT_TOL.eps_prob):
            raise ParameterError(f"negative probability {self.probs.min():.3e}")
        if abs(self.probs.sum() - 1.0) > tol:
            raise ParameterError(f"probabilities sum to {self.probs.sum():.15g}")

    def prob(self, label: float) -> float:
        hits = np.nonzero(np.abs(self.labels - label) <= LABEL_TOL)[0]
        return float(self.probs[hits[0]]) if hits.size else 0.0

    def as_dict(self) -> Dict[float, float]:
        return {float(a): float(p) for a, p in zip(self.labels, self.probs)}

    def max_abs_diff(self, other: "OutcomeDistribution") -> float:
        """Largest probability gap, outcomes matched by label (missing = 0)."""
        labels = _merge_labels(self.labels, other.labels)
        return float(np.max(np.abs(self._on(labels) - other._on(labels))))

    def _on(self, labels: np.ndarray) -> np.ndarray:
        out = np.zeros(len(labels))
        out[_scatter_index(self.labels, labels)] = self.probs
        return out

    def __repr__(self):
        return f"OutcomeDistribution({self.as_dict()!r})"


class JointTable:
    """Joint distribution of several discrete outcomes.

    ``labels[k]`` holds the ascending outcome labels along axis ``k`` of
    ``probs``. A two-axis table reads as ``Pr{X = x_labels[i], Y = y_labels[j]}``.
    """

    def __init__(self, labels: Sequence, probs, *, tol: float = 1e-12):
        self.labels = tuple(np.asarray(l, dtype=float).reshape(-1) for l in labels)
        self.probs = np.asarray(probs, dtype=float)
        if self.probs.shape != tuple(len(l) for l in self.labels):
            raise DimensionError(
                f"table shape {self.probs.shape} does not match label counts "
                f"{[len(l) for l in self.labels]}"
            )
        for l in self.labels:
            if np.any(np.diff(l) <= 0):
                raise ParameterError("labels must be strictly ascending along every axis")
        if np.any(self.probs < -DEFAULT_TOL.eps_prob):
            raise ParameterError(f"negative probability {self.probs.min():.3e}")
        if abs(self.probs.sum() - 1.0) > tol:
            raise ParameterError(f"table sums to {self.probs.sum():.15g}")

    @property
    def ndim(self) -> int:
        return self.probs.ndim

    @property
    def x_labels(self) -> np.ndarray:
        return self.labels[0]

    @property
    def y_labels(self) -> np.ndarray:
        return self.labels[1]

    def marginal(self, axis: int) -> OutcomeDistribution:
        others = tuple(k for k in range(self.ndim) if k != axis)
        return OutcomeDistribution(self.labels[axis], self.probs.sum(axis=others))

    def transpose(self, axes: Optional[Sequence[int]] = None) -> "JointTable":
        axes = tuple(reversed(range(self.ndim))) if axes is None else tuple(axes)
        return JointTable([self.labels[k] for k in axes], self.probs.transpose(axes), tol=1e-9)

    def prob(self, *outcome: float) -> float:
        idx = []
        for l, x in zip(self.labels, outcome):
            hits = np.nonzero(np.abs(l - x) <= LABEL_TOL)[0]
            if not hits.size:
                return 0.0
            idx.append(hits[0])
        return float(self.probs[tuple(idx)])

    def items(self):
        """Yield ``(outcome_tuple, probability)`` in row-major order."""
        for idx in itertools.product(*(range(len(l)) for l in self.labels)):
            yield tuple(float(self.labels[k][i]) for k, i in enumerate(idx)), float(self.probs[idx])

    def max_abs_diff(self, other: "JointTable") -> float:
        """Largest entrywise gap with outcomes matched by label (missing = 0)."""
        if self.ndim != other.ndim:
            raise DimensionError("tables have different numbers of axes")
        merged = [_merge_labels(a, b) for a, b in zip(self.labels, other.labels)]
        return float(np.max(np.abs(self._on(merged) - other._on(merged))))

    def _on(self, merged) -> np.ndarray:
        out = np.zeros(tuple(len(m) for m in merged))
        idx = np.ix_(*(_scatter_index(l, m) for l, m in zip(self.labels, merged)))
        out[idx] = self.probs
        return out

    def __repr__(self):
        return f"JointTable(shape={self.probs.shape})"


def bayes_prior(j: JointTable) -> OutcomeDistribution:
    """Marginal distribution of the first variable."""
    return j.marginal(0)


def bayes_posterior(j: JointTable, y: float, *, eps_prob: float = DEFAULT_TOL.eps_prob):
    """Conditional distribution of X given ``Y = y`` for a two-axis table."""
    if j.ndim != 2:
        raise DimensionError("posterior needs a two-axis (X, Y) table")
    hits = np.nonzero(np.abs(j.y_labels - y) <= LABEL_TOL)[0]
    column = j.probs[:, hits[0]] if hits.size else np.zeros(len(j.x_labels))
    p_y = column.sum()
    if p_y <= eps_prob:
        raise ConditioningError(f"Pr{{Y={y}}} = {p_y:.3e} is too small to condition on")
    return OutcomeDistribution(j.x_labels, column / p_y)


def born_distribution(a, rho) -> OutcomeDistribution:
    """``Pr{A = a} = Tr[E(a) rho]`` over the eigenvalues of ``a``."""
    a, rho = as_observable(a), as_density(rho)
    if a.dim != rho.dim:
        raise DimensionError(f"observable dim {a.dim} != state dim {rho.dim}")
    return OutcomeDistribution(a.labels, [expectation(e, rho.matrix) for e in a.projectors])


def projection_postulate_update(a, outcome: float, rho, *, eps_prob: float = DEFAULT_TOL.eps_prob):
    """Lüders update ``E rho E / Tr[E rho]`` for the outcome ``outcome`` of ``a``."""
    a, rho = as_observable(a), as_density(rho)
    if a.dim != rho.dim:
        raise DimensionError(f"observable dim {a.dim} != state dim {rho.dim}")
    e = a.projector(outcome)
    p = expectation(e, rho.matrix)
    if p <= eps_prob:
        raise ConditioningError(f"outcome {outcome} has probability {p:.3e}")
    return DensityOperator.from_unnormalized(e @ rho.matrix @ e)


def successive_joint(observables, times, h, rho) -> JointTable:
    """Joint statistics of projective measurements of ``observables[k]`` at ``times[k]``.

    The probability of ``(a_1, ..., a_n)`` is ``Tr[K rho K^dagger]`` with
    ``K = E_n(a_n) U(t_n - t_{n-1}) ... E_1(a_1) U(t_1)``. ``h=None`` means no
    free evolution.
    """
    obs = [as_observable(a) for a in observables]
    rho = as_density(rho)
    times = [float(t) for t in times]
    if not obs or len(times) != len(obs):
        raise ParameterError("need one time per observable")
    if times[0] < 0 or any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
        raise ParameterError(f"times must be non-negative and strictly increasing: {times}")
    if any(a.dim != rho.dim for a in obs):
        raise DimensionError("observable and state dimensions differ")
    h = Hamiltonian.zero(rho.dim) if h is None else as_hamiltonian(h)
    if h.dim != rho.dim:
        raise DimensionError("Hamiltonian and state dimensions differ")

    steps = [h.propagator(t1 - t0) for t0, t1 in zip([0.0] + times[:-1], times)]
    probs = np.zeros(tuple(len(a.spectrum) for a in obs))

    def descend(level: int, m: np.ndarray, prefix: Tuple[int, ...]):
        u = steps[level]
        m = u @ m @ u.conj().T
        for i, e in enumerate(obs[level].projectors):
            if level == len(obs) - 1:
                probs[prefix + (i,)] = expectation(e, m)
            else:
                descend(level + 1, e @ m @ e, prefix + (i,))

    descend(0, rho.matrix, ())
    return JointTable([a.labels for a in obs], probs, tol=1e-9)


def commuting_joint(observables, rho, *, tol: float = 1e-9) -> JointTable:
    """Joint distribution ``Tr[E_1...E_n rho E_n...E_1]`` of commuting observables."""
    obs = [as_observable(a) for a in observables]
    rho = as_density(rho)
    if not obs:
        raise ParameterError("need at least one observable")
    if any(a.dim != rho.dim for a in obs):
        raise DimensionError("observable and state dimensions differ")
    for (i, a), (j, b) in itertools.combinations(enumerate(obs), 2):
        if not commutes(a, b, tol):
            raise CommutativityError(f"observables {i} and {j} do not commute")
    probs = np.zeros(tuple(len(a.spectrum) for a in obs))
    for idx in itertools.product(*(range(len(a.spectrum)) for a in obs)):
        prod = np.eye(rho.dim, dtype=complex)
        for a, i in zip(obs, idx):
            prod = prod @ a.projectors[i]
        probs[idx] = expectation(prod @ rho.matrix, prod.conj().T)
    return JointTable([a.labels for a in obs], probs, tol=1e-9)
