"""Indirect measurement models and the state reduction they induce.

A model couples the measured system (the *object*) to an apparatus prepared
in ``sigma``, lets them interact through a unitary ``u`` and then reads the
probe observable on the apparatus. Every composite operator is ordered
``apparatus (x) object``.

The posterior state for outcome ``a`` is

    Tr_A[(E(a) (x) 1) u (sigma (x) rho) u^dagger] / Pr{a},

obtained by conditioning the joint statistics of the probe and an arbitrary
later object observable; no state update rule is applied to the probe
itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import as_hamiltonian
from .errors import (
    ConditioningError,
    DimensionError,
    UnitarityError,
    UnsupportedError,
)
from .linalg import DEFAULT_TOL, as_matrix, max_abs_diff, partial_trace, propagator
from .objects import (
    DensityOperator,
    Instrument,
    Observable,
    StateVector,
    as_density,
    as_observable,
)
from .rules import JointTable, OutcomeDistribution, expectation

__all__ = [
    "MeasurementModel",
    "TransducerSpec",
    "build_transducer",
    "von_neumann_spec",
    "photon_counting_spec",
    "interaction_unitary",
    "joint_state",
    "branch_state",
    "outcome_distribution",
    "prior_state",
    "posterior_state",
    "induced_instrument",
    "probe_joint_table",
]

UNITARY_TOL = 1e-9
POINTER_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementModel:
    """Apparatus state, interaction unitary and probe observable.

    ``measured`` optionally records the object observable the model is meant
    to measure; ``dt`` is the interaction duration, kept as metadata only.
    """

    sigma: DensityOperator
    u: np.ndarray
    probe: Observable
    measured: Optional[Observable] = None
    dt: Optional[float] = None

    def __post_init__(self):
        sigma = as_density(self.sigma)
        probe = as_observable(self.probe)
        u = as_matrix(self.u, "interaction unitary")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "probe", probe)
        object.__setattr__(self, "u", u)
        if probe.dim != sigma.dim:
            raise DimensionError(f"probe dim {probe.dim} != apparatus dim {sigma.dim}")
        if u.shape[0] % sigma.dim:
            raise DimensionError(f"unitary dim {u.shape[0]} is not a multiple of {sigma.dim}")
        err = max_abs_diff(u.conj().T @ u, np.eye(u.shape[0]))
        if err > UNITARY_TOL:
            raise UnitarityError(f"interaction is not unitary (error {err:.3e})")
        if self.measured is not None:
            measured = as_observable(self.measured)
            object.__setattr__(self, "measured", measured)
            if measured.dim != self.object_dim:
                raise DimensionError("measured observable does not act on the object")

    @property
    def apparatus_dim(self) -> int:
        return self.sigma.dim

    @property
    def object_dim(self) -> int:
        return self.u.shape[0] // self.sigma.dim

    @property
    def labels(self) -> np.ndarray:
        return self.probe.labels


@dataclass(frozen=True)
class TransducerSpec:
    """Data for a unitary with ``phi_n (x) xi -> phi'_n (x) xi_n``.

    ``phi_n`` are the eigenvectors of ``measured`` (ascending eigenvalue),
    ``pointer_states`` are the ``xi_n`` and ``post_states`` the ``phi'_n``.
    ``post_states=None`` means ``phi'_n = phi_n``.
    """

    measured: Observable
    xi: StateVector
    pointer_states: Sequence[StateVector]
    post_states: Optional[Sequence[StateVector]] = None


def von_neumann_spec(measured, apparatus_dim: Optional[int] = None) -> TransducerSpec:
    """Transducer that leaves eigenstates intact: ``phi_n (x) e_0 -> phi_n (x) e_n``."""
    measured = as_observable(measured)
    d = measured.dim
    dim_a = d if apparatus_dim is None else apparatus_dim
    if dim_a < d:
        raise DimensionError(f"apparatus dim {dim_a} cannot hold {d} pointer states")
    basis = np.eye(dim_a)
    return TransducerSpec(measured, StateVector(basis[0]), [StateVector(basis[n]) for n in range(d)])


def photon_counting_spec(dim: int) -> TransducerSpec:
    """Idealized photon counter on a number space truncated at ``dim`` levels.

    ``|n> (x) e_0 -> |0> (x) e_n``: the count is recorded and the mode is
    left in the vacuum whatever ``n`` was.
    """
    number = Observable(np.diag(np.arange(dim, dtype=float)))
    basis = np.eye(dim)
    vacuum = StateVector(basis[0])
    return TransducerSpec(
        number,
        StateVector(basis[0]),
        [StateVector(basis[n]) for n in range(dim)],
        [vacuum] * dim,
    )


def _orthonormal_complement(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Columns completing the orthonormal columns of ``vectors`` to a basis.

    Gram-Schmidt (two passes) over the standard basis vectors in index
    order, so the result is deterministic.
    """
    basis = [vectors[:, k] for k in range(vectors.shape[1])]
    extra = []
    for i in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            v = v / norm
            basis.append(v)
            extra.append(v)
        if len(basis) == dim:
            break
    return np.array(extra, dtype=complex).T.reshape(dim, len(extra))


def build_transducer(spec: TransducerSpec, complement=None) -> MeasurementModel:
    """Measurement model realizing ``phi_n (x) xi -> phi'_n (x) xi_n``.

    The map is fixed on the subspace ``H_object (x) xi``; elsewhere it is
    completed by sending a Gram-Schmidt basis of the domain complement to one
    of the range complement. ``complement`` is an optional unitary mixing the
    latter, which changes ``u`` but none of the statistics for inputs of the
    form ``sigma (x) rho``.

    The probe has eigenvector ``xi_n`` with the eigenvalue ``a_n`` of
    ``phi_n``. When the apparatus is larger than the number of outcomes, the
    part of the apparatus space orthogonal to all pointers is lumped into
    the projector of the largest outcome; it is never populated.
    """
    measured = as_observable(spec.measured)
    d = measured.dim
    if not measured.is_nondegenerate():
        raise UnsupportedError("measured observable is degenerate; supply a MeasurementModel directly")
    xi = spec.xi if isinstance(spec.xi, StateVector) else StateVector(spec.xi)
    dim_a = xi.dim
    pointers = np.array(
        [(p if isinstance(p, StateVector) else StateVector(p)).amplitudes for p in spec.pointer_states]
    )
    if pointers.shape != (d, dim_a):
        raise DimensionError(f"need {d} pointer states of dim {dim_a}, got array {pointers.shape}")
    gram_err = max_abs_diff(pointers.conj() @ pointers.T, np.eye(d))
    if gram_err > POINTER_TOL:
        raise UnitarityError(f"pointer states are not orthonormal (error {gram_err:.3e})")
    phis = measured.eigenvectors()
    if spec.post_states is None:
        posts = phis
    else:
        posts = [(p if isinstance(p, StateVector) else StateVector(p)).amplitudes for p in spec.post_states]
        if len(posts) != d or any(p.shape != (d,) for p in posts):
            raise DimensionError(f"need {d} post-measurement states of dim {d}")

    total = dim_a * d
    domain = np.array([np.kron(xi.amplitudes, phi) for phi in phis]).T
    image = np.array([np.kron(ptr, post) for ptr, post in zip(pointers, posts)]).T
    c_dom = _orthonormal_complement(domain, total)
    c_img = _orthonormal_complement(image, total)
    if complement is not None:
        w = as_matrix(complement, "complement rotation")
        if w.shape[0] != c_img.shape[1]:
            raise DimensionError(f"complement rotation must be {c_img.shape[1]}-dimensional")
        c_img = c_img @ w
    u = image @ domain.conj().T + c_img @ c_dom.conj().T
    err = max_abs_diff(u.conj().T @ u, np.eye(total))
    if err > UNITARY_TOL:
        raise UnitarityError(f"transducer completion is not unitary (error {err:.3e})")

    labels = measured.labels
    projs = [np.outer(p, p.conj()) for p in pointers]
    projs[-1] = projs[-1] + (np.eye(dim_a) - sum(projs))
    probe = Observable.from_spectrum(list(zip(labels, projs)))
    return MeasurementModel(DensityOperator(np.outer(xi.amplitudes, xi.amplitudes.conj())), u, probe, measured)


def interaction_unitary(h_int, coupling: float, dt: float, *, h_object=None, h_apparatus=None):
    """``exp(-i (H_A (x) 1 + 1 (x) H_1 + K H_int) dt)`` on apparatus (x) object.

    ``h_object`` and ``h_apparatus`` default to zero; their dimensions are
    inferred from whichever is given. With neither, ``h_int`` is used as is.
    """
    h_int = as_hamiltonian(h_int).matrix
    gen = coupling * h_int
    if h_object is not None or h_apparatus is not None:
        if h_object is not None:
            h1 = as_hamiltonian(h_object).matrix
            dim_a = h_int.shape[0] // h1.shape[0]
        else:
            ha = as_hamiltonian(h_apparatus).matrix
            dim_a = ha.shape[0]
        dim_o = h_int.shape[0] // dim_a
        if dim_a * dim_o != h_int.shape[0]:
            raise DimensionError("interaction dimension does not factor")
        if h_object is not None:
            gen = gen + np.kron(np.eye(dim_a), h1)
        if h_apparatus is not None:
            gen = gen + np.kron(as_hamiltonian(h_apparatus).matrix, np.eye(dim_o))
    return propagator(gen, dt)


def _check_object(m: MeasurementModel, rho) -> DensityOperator:
    rho = as_density(rho)
    if rho.dim != m.object_dim:
        raise DimensionError(f"model acts on dim {m.object_dim}, state has dim {rho.dim}")
    return rho


def joint_state(m: MeasurementModel, rho) -> np.ndarray:
    """Apparatus-object state ``u (sigma (x) rho) u^dagger`` right after the interaction."""
    rho = _check_object(m, rho)
    return m.u @ np.kron(m.sigma.matrix, rho.matrix) @ m.u.conj().T


def branch_state(m: MeasurementModel, rho, outcome: float) -> np.ndarray:
    """Unnormalized ``Tr_A[(E(outcome) (x) 1) u (sigma (x) rho) u^dagger]``."""
    joint = joint_state(m, rho)
    e = np.kron(m.probe.projector(outcome), np.eye(m.object_dim))
    return partial_trace(e @ joint, m.apparatus_dim, m.object_dim, "first")


def outcome_distribution(m: MeasurementModel, rho) -> OutcomeDistribution:
    joint = joint_state(m, rho)
    eye = np.eye(m.object_dim)
    return OutcomeDistribution(
        m.labels, [expectation(np.kron(e, eye), joint) for e in m.probe.projectors]
    )


def prior_state(m: MeasurementModel, rho) -> DensityOperator:
    """State after the interaction when the outcome is ignored."""
    joint = joint_state(m, rho)
    return DensityOperator(partial_trace(joint, m.apparatus_dim, m.object_dim, "first"))


def posterior_state(m: MeasurementModel, rho, outcome: float, *, eps_prob: float = DEFAULT_TOL.eps_prob):
    """State conditional on reading ``outcome`` from the probe."""
    out = branch_state(m, rho, outcome)
    p = float(np.trace(out).real)
    if p <= eps_prob:
        raise ConditioningError(f"outcome {outcome} has probability {p:.3e}")
    return DensityOperator.from_unnormalized(out)


def induced_instrument(m: MeasurementModel, *, cutoff: float = 1e-14) -> Instrument:
    """Kraus form of the branch maps ``rho -> Tr_A[(E(a) (x) 1) u (sigma (x) rho) u^dagger]``.

    With ``sigma = sum_k s_k |chi_k><chi_k|`` and ``{u_j}`` an orthonormal basis
    of the range of ``E(a)``, branch ``a`` has Kraus operators
    ``sqrt(s_k) (<u_j| (x) 1) u (|chi_k> (x) 1)``. Eigenvalues of ``sigma`` at or
    below ``cutoff`` are dropped.
    """
    dim_a, d = m.apparatus_dim, m.object_dim
    s, chi = np.linalg.eigh(m.sigma.matrix)
    keep = s > cutoff
    s, chi = s[keep], chi[:, keep]
    blocks = m.u.reshape(dim_a, d, dim_a, d)
    branches = []
    for label, e in m.probe.spectrum:
        w, v = np.linalg.eigh(e)
        range_basis = v[:, w > 0.5]
        ops = []
        for j in range(range_basis.shape[1]):
            for k in range(len(s)):
                op = np.einsum("a,aibj,b->ij", range_basis[:, j].conj(), blocks, chi[:, k])
                ops.append(np.sqrt(s[k]) * op)
        branches.append((label, ops))
    return Instrument(branches)


def probe_joint_table(m: MeasurementModel, rho, b_obs, *, h=None, tau: float = 0.0) -> JointTable:
    """Joint table of a later object observable ``b_obs`` (axis 0) and the probe (axis 1).

    ``Pr{B(tau) = b, probe = a} = Tr[(E(a) (x) U^dagger E^B(b) U) u (sigma (x) rho) u^dagger]``
    where ``U`` is the object's free evolution for time ``tau`` under ``h``.
    Both factors are measured on the composite, commuting because they act
    on different tensor factors.
    """
    b_obs = as_observable(b_obs)
    if b_obs.dim != m.object_dim:
        raise DimensionError("B must act on the object")
    joint = joint_state(m, rho)
    if h is not None and tau:
        u_free = as_hamiltonian(h).propagator(tau)
        b_projs = [u_free.conj().T @ e @ u_free for e in b_obs.projectors]
    else:
        b_projs = b_obs.projectors
    probs = np.array(
        [[expectation(np.kron(ea, eb), joint) for ea in m.probe.projectors] for eb in b_projs]
    )
    return JointTable([b_obs.labels, m.labels], probs, tol=1e-9)
