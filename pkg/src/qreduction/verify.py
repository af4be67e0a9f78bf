"""Randomized invariant suite.

Each property draws ``trials`` random instances from its own child seed and
reports the largest violation seen. A property passes when that maximum is
strictly below its tolerance.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import sampling
from .dynamics import Hamiltonian, evolve_state, heisenberg_projector
from .local import (
    a_marginal_formula,
    affinity_check,
    joint_simulated,
    marginal_checks,
    no_signaling_check,
    theorem_violation,
)
from .model import (
    branch_state,
    build_transducer,
    induced_instrument,
    outcome_distribution,
    photon_counting_spec,
    posterior_state,
    prior_state,
    probe_joint_table,
    von_neumann_spec,
)
from .objects import apply_instrument, mix, pure_state
from .rules import (
    JointTable,
    bayes_posterior,
    bayes_prior,
    born_distribution,
    commuting_joint,
    projection_postulate_update,
    successive_joint,
)

__all__ = ["Property", "PropertyResult", "PROPERTIES", "run_suite"]

Trial = Callable[[np.random.Generator], float]


@dataclass(frozen=True)
class Property:
    name: str
    tol: float
    trial: Trial
    description: str


@dataclass(frozen=True)
class PropertyResult:
    name: str
    max_violation: float
    tol: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "max_violation": self.max_violation,
            "tol": self.tol,
            "trials": self.trials,
            "passed": self.passed,
        }


def _gap(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _theorem(rng):
    return theorem_violation(sampling.random_local_setup(rng))


def _a_marginal(rng):
    s = sampling.random_local_setup(rng)
    return joint_simulated(s).marginal(0).max_abs_diff(a_marginal_formula(s))


def _no_signaling(rng):
    s = sampling.random_local_setup(rng)
    other = sampling.random_transducer(
        s.d1, int(rng.integers(s.d1, 5)), rng, projective=False, measured=s.a_obs
    )
    report = no_signaling_check(s, other)
    return max(report.between_models, report.to_formula)


def _affinity(rng):
    s = sampling.random_local_setup(rng)
    dim = s.d1 * s.d2
    rho1, rho2 = sampling.random_density(dim, rng), sampling.random_density(dim, rng)
    return affinity_check(s, rho1, rho2, float(rng.uniform(0.01, 0.99))).max_violation


def _reconstruction(rng):
    s = sampling.random_local_setup(rng, d1=2, d2=2)
    r = marginal_checks(s)
    return max(r.a_marginal_error, r.b_marginal_error, r.product_error, r.closed_form_error,
               r.completeness_error, max(0.0, -r.min_eigenvalue))


def _random_model(rng):
    d = int(rng.integers(2, 4))
    return sampling.random_transducer(d, int(rng.integers(d, 5)), rng, projective=bool(rng.integers(0, 2)))


def _quantum_bayes(rng):
    m = _random_model(rng)
    rho = sampling.random_density(m.object_dim, rng)
    worst = 0.0
    dist = outcome_distribution(m, rho)
    for _ in range(3):
        b = sampling.random_observable(m.object_dim, rng)
        table = probe_joint_table(m, rho, b)
        for a, p in zip(dist.labels, dist.probs):
            if p <= 1e-6:
                continue
            classical = bayes_posterior(table, a)
            quantum = born_distribution(b, posterior_state(m, rho, a))
            worst = max(worst, classical.max_abs_diff(quantum))
    return worst


def _projection_recovery(rng):
    d = int(rng.integers(2, 4))
    a = sampling.random_observable(d, rng)
    m = build_transducer(von_neumann_spec(a))
    rho = sampling.random_density(d, rng)
    worst = 0.0
    for label in a.labels:
        if born_distribution(a, rho).prob(label) > 1e-12:
            worst = max(worst, _gap(posterior_state(m, rho, label).matrix,
                                    projection_postulate_update(a, label, rho).matrix))
    return worst


@functools.lru_cache(maxsize=None)
def _photon_model():
    return build_transducer(photon_counting_spec(4))


def _photon_counting(rng):
    m = _photon_model()
    psi = sampling.random_ket(4, rng)
    rho = pure_state(psi)
    dist = outcome_distribution(m, rho)
    worst = _gap(dist.probs, np.abs(psi.amplitudes) ** 2)
    vacuum = np.diag([1.0, 0, 0, 0])
    for n, p in zip(dist.labels, dist.probs):
        if p > 1e-12:
            worst = max(worst, _gap(posterior_state(m, rho, n).matrix, vacuum))
    return worst


def _statistical_formula(rng):
    d = int(rng.integers(2, 4))
    spec = sampling.random_transducer_spec(d, int(rng.integers(d, 5)), rng)
    m = build_transducer(spec)
    rho = sampling.random_density(d, rng)
    return outcome_distribution(m, rho).max_abs_diff(born_distribution(spec.measured, rho))


def _instrument_choi(rng):
    inst = induced_instrument(_random_model(rng))
    return max(0.0, -min(inst.choi_min_eigenvalues()))


def _instrument_normalization(rng):
    return induced_instrument(_random_model(rng)).normalization_error()


def _instrument_equivalence(rng):
    m = _random_model(rng)
    inst = induced_instrument(m)
    rho = sampling.random_density(m.object_dim, rng)
    dist = outcome_distribution(m, rho)
    worst = 0.0
    for branch in apply_instrument(inst, rho):
        worst = max(worst, abs(branch.probability - dist.prob(branch.label)))
        if branch.post_state is not None and branch.probability > 1e-6:
            worst = max(worst, _gap(branch.post_state.matrix, posterior_state(m, rho, branch.label).matrix))
    return worst


def _nonselective(rng):
    m = _random_model(rng)
    rho = sampling.random_density(m.object_dim, rng)
    total = sum(branch_state(m, rho, a) for a in m.labels)
    return _gap(prior_state(m, rho).matrix, total)


def _model_affinity(rng):
    m = _random_model(rng)
    r1, r2 = sampling.random_density(m.object_dim, rng), sampling.random_density(m.object_dim, rng)
    alpha = float(rng.uniform(0.01, 0.99))
    mixed = mix(r1, r2, alpha)
    worst = _gap(outcome_distribution(m, mixed).probs,
                 alpha * outcome_distribution(m, r1).probs + (1 - alpha) * outcome_distribution(m, r2).probs)
    for a in m.labels:
        worst = max(worst, _gap(branch_state(m, mixed, a),
                                alpha * branch_state(m, r1, a) + (1 - alpha) * branch_state(m, r2, a)))
    return worst


def _completion_independence(rng):
    d = int(rng.integers(2, 4))
    dim_a = int(rng.integers(d, 5))
    spec = sampling.random_transducer_spec(d, dim_a, rng)
    m1 = build_transducer(spec)
    m2 = build_transducer(spec, complement=sampling.random_unitary(d * dim_a - d, rng))
    rho = sampling.random_density(d, rng)
    worst = outcome_distribution(m1, rho).max_abs_diff(outcome_distribution(m2, rho))
    for a in m1.labels:
        worst = max(worst, _gap(branch_state(m1, rho, a), branch_state(m2, rho, a)))
    return worst


def _bayes_reweighting(rng):
    nx, ny = (int(k) for k in rng.integers(2, 5, size=2))
    probs = rng.uniform(size=(nx, ny))
    table = JointTable([np.arange(nx), np.arange(ny)], probs / probs.sum())
    y_dist = table.marginal(1)
    recombined = sum(p * bayes_posterior(table, y).probs for y, p in zip(y_dist.labels, y_dist.probs))
    return _gap(recombined, bayes_prior(table).probs)


def _rules_commuting(rng):
    d1, d2 = 2, int(rng.integers(2, 4))
    a = np.kron(sampling.random_observable(d1, rng).matrix, np.eye(d2))
    b = np.kron(np.eye(d1), sampling.random_observable(d2, rng).matrix)
    rho = sampling.random_density(d1 * d2, rng)
    times = np.sort(rng.uniform(0, 1, size=2))
    forward = successive_joint([a, b], times, None, rho)
    backward = successive_joint([b, a], times, None, rho).transpose()
    reference = commuting_joint([a, b], rho)
    return max(forward.max_abs_diff(reference), backward.max_abs_diff(reference))


def _rules_first_marginal(rng):
    d = int(rng.integers(2, 4))
    obs = [sampling.random_observable(d, rng) for _ in range(3)]
    h = Hamiltonian(sampling.random_hermitian(d, rng))
    rho = sampling.random_density(d, rng)
    times = np.sort(rng.uniform(0, 3, size=3))
    joint = successive_joint(obs, times, h, rho)
    return joint.marginal(0).max_abs_diff(born_distribution(obs[0], evolve_state(rho, h, times[0])))


def _duality(rng):
    d = int(rng.integers(2, 5))
    h = Hamiltonian(sampling.random_hermitian(d, rng))
    e = sampling.random_observable(d, rng).projectors[0]
    rho = sampling.random_density(d, rng)
    t = float(rng.uniform(-5, 5))
    lhs = np.trace(heisenberg_projector(e, h, t) @ rho.matrix)
    rhs = np.trace(e @ evolve_state(rho, h, t).matrix)
    return float(abs(lhs - rhs))


PROPERTIES: List[Property] = [
    Property("theorem_equivalence", 1e-9, _theorem, "simulated joint table equals the closed form"),
    Property("a_marginal", 1e-9, _a_marginal, "probe marginal equals Born distribution of A at t1"),
    Property("no_signaling", 1e-9, _no_signaling, "B marginal independent of the A apparatus"),
    Property("affinity", 1e-10, _affinity, "joint table is affine in the initial state"),
    Property("marginal_reconstruction", 1e-8, _reconstruction,
             "reconstructed F(a,b) has projector marginals and product form"),
    Property("quantum_bayes", 1e-9, _quantum_bayes, "posterior state reproduces Bayes-conditioned tables"),
    Property("projection_recovery", 1e-10, _projection_recovery,
             "von Neumann transducer gives the projection-postulate update"),
    Property("photon_counting", 1e-10, _photon_counting, "photon counter: Born counts, vacuum posterior"),
    Property("statistical_formula", 1e-10, _statistical_formula,
             "any transducer reproduces the Born distribution"),
    Property("instrument_cp", 1e-8, _instrument_choi, "branch Choi matrices are PSD"),
    Property("instrument_normalization", 1e-9, _instrument_normalization, "sum of K^dagger K is the identity"),
    Property("instrument_equivalence", 1e-9, _instrument_equivalence,
             "instrument reproduces outcome distribution and posteriors"),
    Property("nonselective_decomposition", 1e-9, _nonselective, "prior state is the sum of branch states"),
    Property("model_affinity", 1e-10, _model_affinity, "outcome statistics and branches affine in rho"),
    Property("completion_independence", 1e-10, _completion_independence,
             "statistics do not depend on the unitary completion"),
    Property("bayes_reweighting", 1e-12, _bayes_reweighting, "posteriors average back to the prior"),
    Property("rules_commuting", 1e-10, _rules_commuting,
             "successive and simultaneous joints agree for commuting observables"),
    Property("rules_first_marginal", 1e-10, _rules_first_marginal,
             "first marginal of a successive joint is the Born distribution"),
    Property("schrodinger_heisenberg", 1e-10, _duality, "Schrödinger and Heisenberg pictures agree"),
]


def run_suite(seed: int = 42, trials: int = 25, tol: Optional[float] = None,
              properties: Optional[List[Property]] = None) -> List[PropertyResult]:
    """Run every property for ``trials`` random instances.

    ``tol`` overrides every property's own tolerance.
    """
    properties = PROPERTIES if properties is None else properties
    children = np.random.SeedSequence(seed).spawn(len(properties))
    results = []
    for prop, child in zip(properties, children):
        rng = np.random.default_rng(child)
        worst = 0.0
        for _ in range(trials):
            worst = max(worst, float(prop.trial(rng)))
        results.append(PropertyResult(prop.name, worst, prop.tol if tol is None else tol, trials))
    return results
