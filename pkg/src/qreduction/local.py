"""Joint statistics of a local measurement on S1 and a later measurement on S2.

Two noninteracting systems S1 (Hamiltonian ``h1``) and S2 (``h2``) start in
``rho0``. At ``t1`` an apparatus coupled only to S1 measures ``a_obs`` through
a :class:`~qreduction.model.MeasurementModel`; the interaction lasts ``dt``. At
``t2 >= t1 + dt`` the observable ``b_obs`` of S2 is measured.

Two routes to ``Pr{A(t1) = a, B(t2) = b}`` are provided:

* :func:`joint_formula` evaluates the closed form
  ``Tr[(E_A(a; t1) (x) E_B(b; t2)) rho0]`` with Heisenberg-evolved projectors;
* :func:`joint_simulated` runs the whole apparatus + S1 + S2 evolution and
  reads the probe and ``B`` together at the end. They act on different
  tensor factors, so nothing beyond the Born rule on the composite is used.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .dynamics import Hamiltonian, as_hamiltonian, heisenberg
from .errors import DimensionError, ParameterError, ReconstructionError
from .linalg import max_abs_diff, min_eigenvalue, partial_trace
from .objects import DensityOperator, Observable, as_density, as_observable, mix
from .model import MeasurementModel
from .rules import JointTable, OutcomeDistribution, expectation

__all__ = [
    "LocalSetup",
    "JointOperatorMeasure",
    "MarginalReport",
    "AffinityReport",
    "NoSignalingReport",
    "joint_formula",
    "joint_simulated",
    "theorem_violation",
    "a_marginal_formula",
    "b_marginal_formula",
    "informationally_complete_states",
    "reconstruct_joint_measure",
    "marginal_checks",
    "affinity_check",
    "no_signaling_check",
]

TIME_SLACK = 1e-12


@dataclass(frozen=True)
class LocalSetup:
    h1: Hamiltonian
    h2: Hamiltonian
    model: MeasurementModel
    a_obs: Observable
    b_obs: Observable
    t1: float
    dt: float
    t2: float
    rho0: DensityOperator
    # apparatus free Hamiltonian between the end of the interaction and t2
    h_apparatus: Optional[Hamiltonian] = None

    def __post_init__(self):
        for name, conv in (("h1", as_hamiltonian), ("h2", as_hamiltonian),
                           ("a_obs", as_observable), ("b_obs", as_observable),
                           ("rho0", as_density)):
            object.__setattr__(self, name, conv(getattr(self, name)))
        if self.h_apparatus is not None:
            object.__setattr__(self, "h_apparatus", as_hamiltonian(self.h_apparatus))
            if self.h_apparatus.dim != self.model.apparatus_dim:
                raise DimensionError("apparatus Hamiltonian has the wrong dimension")
        if self.h1.dim != self.a_obs.dim or self.model.object_dim != self.a_obs.dim:
            raise DimensionError("h1, a_obs and the model's object must share S1's dimension")
        if self.h2.dim != self.b_obs.dim:
            raise DimensionError("h2 and b_obs must share S2's dimension")
        if self.rho0.dim != self.d1 * self.d2:
            raise DimensionError(f"rho0 has dim {self.rho0.dim}, expected {self.d1 * self.d2}")
        if self.t1 < 0 or self.dt < 0:
            raise ParameterError("t1 and dt must be non-negative")
        if self.t1 + self.dt > self.t2 + TIME_SLACK:
            raise ParameterError(f"need t1 + dt <= t2, got {self.t1} + {self.dt} > {self.t2}")

    @property
    def d1(self) -> int:
        return self.a_obs.dim

    @property
    def d2(self) -> int:
        return self.b_obs.dim

    @property
    def tau(self) -> float:
        return max(0.0, self.t2 - self.t1 - self.dt)

    def with_state(self, rho0) -> "LocalSetup":
        return dataclasses.replace(self, rho0=rho0)


def _formula_operators(s: LocalSetup):
    a_ops = [heisenberg(e, s.h1, s.t1) for e in s.a_obs.projectors]
    b_ops = [heisenberg(e, s.h2, s.t2) for e in s.b_obs.projectors]
    return a_ops, b_ops


def joint_formula(s: LocalSetup) -> JointTable:
    """``Tr[(e^{iH1 t1} E_A(a) e^{-iH1 t1} (x) e^{iH2 t2} E_B(b) e^{-iH2 t2}) rho0]``."""
    a_ops, b_ops = _formula_operators(s)
    probs = np.array([[expectation(np.kron(ea, eb), s.rho0.matrix) for eb in b_ops] for ea in a_ops])
    return JointTable([s.a_obs.labels, s.b_obs.labels], probs, tol=1e-9)


def _final_state(s: LocalSetup, rho0: np.ndarray) -> np.ndarray:
    dim_a = s.model.apparatus_dim
    # free evolution of S1 + S2 up to t1
    u0 = np.kron(s.h1.propagator(s.t1), s.h2.propagator(s.t1))
    state = u0 @ rho0 @ u0.conj().T
    # interaction: apparatus couples to S1 only, S2 keeps evolving freely
    state = np.kron(s.model.sigma.matrix, state)
    w = np.kron(s.model.u, s.h2.propagator(s.dt))
    state = w @ state @ w.conj().T
    # free evolution from t1 + dt to t2
    tau = s.tau
    u_app = np.eye(dim_a) if s.h_apparatus is None else s.h_apparatus.propagator(tau)
    v = np.kron(np.kron(u_app, s.h1.propagator(tau)), s.h2.propagator(tau))
    return v @ state @ v.conj().T


def _simulated_probs(s: LocalSetup, rho0: np.ndarray) -> np.ndarray:
    final = _final_state(s, rho0)
    eye1 = np.eye(s.d1)
    return np.array(
        [
            [expectation(np.kron(np.kron(ea, eye1), eb), final) for eb in s.b_obs.projectors]
            for ea in s.model.probe.projectors
        ]
    )


def joint_simulated(s: LocalSetup) -> JointTable:
    """Brute-force joint table from the full apparatus + S1 + S2 evolution."""
    return JointTable([s.model.labels, s.b_obs.labels], _simulated_probs(s, s.rho0.matrix), tol=1e-9)


def theorem_violation(s: LocalSetup) -> float:
    """Max entrywise gap between the simulated and closed-form joint tables."""
    return joint_simulated(s).max_abs_diff(joint_formula(s))


def a_marginal_formula(s: LocalSetup) -> OutcomeDistribution:
    """Born distribution of ``A`` at ``t1`` in the reduced state of S1."""
    rho1 = partial_trace(s.rho0.matrix, s.d1, s.d2, "second")
    return OutcomeDistribution(
        s.a_obs.labels, [expectation(heisenberg(e, s.h1, s.t1), rho1) for e in s.a_obs.projectors]
    )


def b_marginal_formula(s: LocalSetup) -> OutcomeDistribution:
    """``Tr[(1 (x) e^{iH2 t2} E_B(b) e^{-iH2 t2}) rho0]``: B alone, no A-measurement."""
    rho2 = partial_trace(s.rho0.matrix, s.d1, s.d2, "first")
    return OutcomeDistribution(
        s.b_obs.labels, [expectation(heisenberg(e, s.h2, s.t2), rho2) for e in s.b_obs.projectors]
    )


def informationally_complete_states(dim: int) -> List[np.ndarray]:
    """``dim**2`` density operators spanning all ``dim x dim`` matrices.

    The basis projectors ``|i><i|`` plus, for each ``i < j``, the projectors
    onto ``(|i> + |j>)/sqrt 2`` and ``(|i> + i|j>)/sqrt 2``.
    """
    basis = np.eye(dim, dtype=complex)
    states = [np.outer(basis[i], basis[i]) for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1.0, 1j):
                v = (basis[i] + phase * basis[j]) / np.sqrt(2.0)
                states.append(np.outer(v, v.conj()))
    return states


@dataclass(frozen=True)
class JointOperatorMeasure:
    """Operators ``F(a, b)`` with ``Pr{a, b | rho} = Tr[F(a, b) rho]``.

    ``f`` has shape ``(len(a_labels), len(b_labels), D, D)``.
    """

    a_labels: np.ndarray
    b_labels: np.ndarray
    f: np.ndarray

    @property
    def entries(self):
        return [
            (float(a), float(b), self.f[i, j])
            for i, a in enumerate(self.a_labels)
            for j, b in enumerate(self.b_labels)
        ]

    def a_marginal(self, i: int) -> np.ndarray:
        return self.f[i].sum(axis=0)

    def b_marginal(self, j: int) -> np.ndarray:
        return self.f[:, j].sum(axis=0)

    def min_eigenvalue(self) -> float:
        return min(min_eigenvalue(op) for _, _, op in self.entries)

    def hermiticity_error(self) -> float:
        return max(max_abs_diff(op, op.conj().T) for _, _, op in self.entries)

    def completeness_error(self) -> float:
        return max_abs_diff(self.f.sum(axis=(0, 1)), np.eye(self.f.shape[-1]))


def reconstruct_joint_measure(s: LocalSetup, states: Optional[Sequence] = None) -> JointOperatorMeasure:
    """Recover ``F(a, b)`` by running :func:`joint_simulated` on a probe family.

    ``Tr[F rho_k] = p_k`` is linear in the entries of ``F``; with an
    informationally complete family (the default) the system has a unique
    solution. A rank-deficient family raises :class:`ReconstructionError`.
    """
    dim = s.d1 * s.d2
    states = informationally_complete_states(dim) if states is None else [
        np.asarray(getattr(r, "matrix", r), dtype=complex) for r in states
    ]
    if any(r.shape != (dim, dim) for r in states):
        raise DimensionError(f"probe states must be {dim} x {dim}")
    # Tr[F rho] = sum_ij F_ij rho_ji
    design = np.array([r.T.reshape(-1) for r in states])
    rank = np.linalg.matrix_rank(design, tol=1e-9)
    if rank < dim * dim:
        raise ReconstructionError(f"probe family spans rank {rank} < {dim * dim}")
    data = np.array([_simulated_probs(s, r) for r in states])
    n_a, n_b = data.shape[1:]
    solution, *_ = np.linalg.lstsq(design, data.reshape(len(states), -1).astype(complex), rcond=None)
    f = solution.T.reshape(n_a, n_b, dim, dim)
    return JointOperatorMeasure(s.model.labels, s.b_obs.labels, f)


@dataclass(frozen=True)
class MarginalReport:
    a_marginal_error: float  # |sum_b F(a,b) - E_A(a;t1) (x) 1|
    b_marginal_error: float  # |sum_a F(a,b) - 1 (x) E_B(b;t2)|
    product_error: float  # |F(a,b) - (sum_b F)(sum_a F)|
    closed_form_error: float  # |F(a,b) - E_A(a;t1) (x) E_B(b;t2)|
    min_eigenvalue: float
    completeness_error: float
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return (
            max(self.a_marginal_error, self.b_marginal_error, self.product_error,
                self.closed_form_error, self.completeness_error) < self.tol
            and self.min_eigenvalue >= -self.tol
        )


def marginal_checks(s: LocalSetup, *, tol: float = 1e-8) -> MarginalReport:
    """Reconstruct ``F(a, b)`` and test both marginal identities and the product form."""
    measure = reconstruct_joint_measure(s)
    eye1, eye2 = np.eye(s.d1), np.eye(s.d2)
    b_ops = [heisenberg(e, s.h2, s.t2) for e in s.b_obs.projectors]
    a_ops = [heisenberg(s.a_obs.projector(a), s.h1, s.t1) for a in measure.a_labels]
    a_err = max(max_abs_diff(measure.a_marginal(i), np.kron(ea, eye2)) for i, ea in enumerate(a_ops))
    b_err = max(max_abs_diff(measure.b_marginal(j), np.kron(eye1, eb)) for j, eb in enumerate(b_ops))
    prod_err = 0.0
    closed_err = 0.0
    for i, ea in enumerate(a_ops):
        for j, eb in enumerate(b_ops):
            f = measure.f[i, j]
            prod_err = max(prod_err, max_abs_diff(f, measure.a_marginal(i) @ measure.b_marginal(j)))
            closed_err = max(closed_err, max_abs_diff(f, np.kron(ea, eb)))
    return MarginalReport(
        a_marginal_error=a_err,
        b_marginal_error=b_err,
        product_error=prod_err,
        closed_form_error=closed_err,
        min_eigenvalue=measure.min_eigenvalue(),
        completeness_error=measure.completeness_error(),
        tol=tol,
    )


@dataclass(frozen=True)
class AffinityReport:
    max_violation: float
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tol


def affinity_check(s: LocalSetup, rho1, rho2, alpha: float, *, tol: float = 1e-10) -> AffinityReport:
    """Compare the simulated joint table of a mixture with the mixture of tables."""
    mixed = mix(rho1, rho2, alpha)
    lhs = joint_simulated(s.with_state(mixed)).probs
    rhs = (alpha * joint_simulated(s.with_state(as_density(rho1))).probs
           + (1 - alpha) * joint_simulated(s.with_state(as_density(rho2))).probs)
    return AffinityReport(float(np.max(np.abs(lhs - rhs))), tol)


@dataclass(frozen=True)
class NoSignalingReport:
    between_models: float  # max |B-marginal(model) - B-marginal(other)|
    to_formula: float  # max over both models of |B-marginal - closed form|
    tol: float = 1e-9

    @property
    def passed(self) -> bool:
        return max(self.between_models, self.to_formula) < self.tol


def no_signaling_check(s: LocalSetup, other: MeasurementModel, *, tol: float = 1e-9) -> NoSignalingReport:
    """B-statistics with ``s.model`` versus ``other`` measuring A, and versus no A at all."""
    first = joint_simulated(s).marginal(1)
    second = joint_simulated(dataclasses.replace(s, model=other)).marginal(1)
    reference = b_marginal_formula(s)
    return NoSignalingReport(
        first.max_abs_diff(second),
        max(first.max_abs_diff(reference), second.max_abs_diff(reference)),
        tol,
    )
