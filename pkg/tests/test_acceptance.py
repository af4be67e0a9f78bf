"""Acceptance criteria, one test each, run at the stated tolerances.

Every test records a PASS/FAIL line that is printed in the
``acceptance criteria`` section of the pytest terminal summary.
"""

import dataclasses
import subprocess
import sys
import time

import numpy as np

from qreduction.linalg import max_abs_diff
from qreduction.local import (
    affinity_check,
    b_marginal_formula,
    joint_simulated,
    marginal_checks,
    theorem_violation,
)
from qreduction.model import (
    build_transducer,
    induced_instrument,
    outcome_distribution,
    photon_counting_spec,
    posterior_state,
    probe_joint_table,
    von_neumann_spec,
)
from qreduction.objects import apply_instrument, pure_state
from qreduction.rules import (
    bayes_posterior,
    born_distribution,
    commuting_joint,
    projection_postulate_update,
    successive_joint,
)
from qreduction.sampling import (
    random_density,
    random_ket,
    random_local_setup,
    random_observable,
    random_transducer,
    random_transducer_spec,
)


def _rng(k):
    return np.random.default_rng([2024, k])


def test_criterion_01_local_theorem(record_criterion):
    rng = _rng(1)
    start = time.perf_counter()
    worst = 0.0
    for k in range(60):
        # alternate projective and non-projective transducers so both are covered
        s = random_local_setup(rng, projective=bool(k % 2))
        worst = max(worst, theorem_violation(s))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 10.0
    record_criterion(1, f"local theorem over 60 setups in {elapsed:.2f}s", worst, 1e-9, ok)
    assert ok


def test_criterion_02_quantum_bayes(record_criterion):
    rng = _rng(2)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        m = random_transducer(d, int(rng.integers(d, 5)), rng)
        rho = random_density(d, rng)
        dist = outcome_distribution(m, rho)
        for b in [random_observable(d, rng) for _ in range(3)]:
            table = probe_joint_table(m, rho, b)
            for a, p in zip(dist.labels, dist.probs):
                if p > 1e-6:
                    expected = born_distribution(b, posterior_state(m, rho, a))
                    worst = max(worst, bayes_posterior(table, a).max_abs_diff(expected))
    ok = worst < 1e-9
    record_criterion(2, "quantum Bayes consistency, 20 models x 3 observables", worst, 1e-9, ok)
    assert ok


def test_criterion_03_projection_recovery(record_criterion):
    rng = _rng(3)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        a = random_observable(d, rng)
        m = build_transducer(von_neumann_spec(a))
        rho = random_density(d, rng)
        born = born_distribution(a, rho)
        for label in a.labels:
            if born.prob(label) > 1e-12:
                gap = max_abs_diff(posterior_state(m, rho, label).matrix,
                                   projection_postulate_update(a, label, rho).matrix)
                worst = max(worst, gap)
    ok = worst < 1e-10
    record_criterion(3, "projection-postulate recovery, 20 states", worst, 1e-10, ok)
    assert ok


def test_criterion_04_photon_counting(record_criterion):
    rng = _rng(4)
    m = build_transducer(photon_counting_spec(4))
    vacuum = np.diag([1.0, 0, 0, 0])
    worst = 0.0
    for _ in range(20):
        psi = random_ket(4, rng)
        rho = pure_state(psi)
        dist = outcome_distribution(m, rho)
        worst = max(worst, max_abs_diff(dist.probs, np.abs(psi.amplitudes) ** 2))
        for n, p in zip(dist.labels, dist.probs):
            if p > 1e-12:
                worst = max(worst, max_abs_diff(posterior_state(m, rho, n).matrix, vacuum))
    ok = worst < 1e-10
    record_criterion(4, "photon counting, 20 states", worst, 1e-10, ok)
    assert ok


def test_criterion_05_statistical_formula(record_criterion):
    rng = _rng(5)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        spec = random_transducer_spec(d, int(rng.integers(d, 5)), rng, projective=False)
        m = build_transducer(spec)
        rho = random_density(d, rng)
        worst = max(worst, outcome_distribution(m, rho).max_abs_diff(born_distribution(spec.measured, rho)))
    ok = worst < 1e-10
    record_criterion(5, "statistical formula, 20 post-state families", worst, 1e-10, ok)
    assert ok


def test_criterion_06_instrument_validity(record_criterion):
    rng = _rng(6)
    choi_min, norm_err, repro_err = np.inf, 0.0, 0.0
    for k in range(20):
        d = int(rng.integers(2, 4))
        m = random_transducer(d, int(rng.integers(d, 5)), rng, projective=bool(k % 2))
        inst = induced_instrument(m)
        choi_min = min(choi_min, min(inst.choi_min_eigenvalues()))
        norm_err = max(norm_err, inst.normalization_error())
        rho = random_density(d, rng)
        dist = outcome_distribution(m, rho)
        for branch in apply_instrument(inst, rho):
            repro_err = max(repro_err, abs(branch.probability - dist.prob(branch.label)))
            if branch.probability > 1e-6:
                gap = max_abs_diff(branch.post_state.matrix, posterior_state(m, rho, branch.label).matrix)
                repro_err = max(repro_err, gap)
    ok = choi_min >= -1e-8 and norm_err < 1e-9 and repro_err < 1e-9
    worst = max(max(0.0, -choi_min), norm_err, repro_err)
    record_criterion(6, f"instrument validity (Choi min {choi_min:.1e}, norm {norm_err:.1e}, "
                        f"repro {repro_err:.1e})", worst, 1e-9, ok)
    assert ok


def test_criterion_07_affinity(record_criterion):
    rng = _rng(7)
    worst = 0.0
    for _ in range(20):
        s = random_local_setup(rng)
        dim = s.d1 * s.d2
        report = affinity_check(s, random_density(dim, rng), random_density(dim, rng),
                                float(rng.uniform(0.01, 0.99)))
        worst = max(worst, report.max_violation)
    ok = worst < 1e-10
    record_criterion(7, "affinity in the initial state, 20 triples", worst, 1e-10, ok)
    assert ok


def test_criterion_08_no_signaling(record_criterion):
    rng = _rng(8)
    worst = 0.0
    for _ in range(20):
        s = random_local_setup(rng, projective=True)
        # a second, different apparatus for the same A: other size, non-projective
        other = random_transducer(s.d1, 4 if s.model.apparatus_dim < 4 else s.d1, rng,
                                  projective=False, measured=s.a_obs)
        first = joint_simulated(s).marginal(1)
        second = joint_simulated(dataclasses.replace(s, model=other)).marginal(1)
        reference = b_marginal_formula(s)
        worst = max(worst, first.max_abs_diff(second),
                    first.max_abs_diff(reference), second.max_abs_diff(reference))
    ok = worst < 1e-9
    record_criterion(8, "no-signaling across two apparatus models, 20 setups", worst, 1e-9, ok)
    assert ok


def test_criterion_09_marginal_reconstruction(record_criterion):
    rng = _rng(9)
    worst = 0.0
    for _ in range(10):
        r = marginal_checks(random_local_setup(rng, d1=2, d2=2))
        worst = max(worst, r.a_marginal_error, r.b_marginal_error, r.product_error,
                    r.closed_form_error, max(0.0, -r.min_eigenvalue))
    ok = worst < 1e-8
    record_criterion(9, "F(a,b) marginals and product form, 10 qubit pairs", worst, 1e-8, ok)
    assert ok


def test_criterion_10_rules(record_criterion):
    rng = _rng(10)
    exact = True
    for _ in range(20):
        d = int(rng.integers(2, 5))
        a = random_observable(d, rng)
        rho = random_density(d, rng)
        exact &= np.array_equal(successive_joint([a], [0.0], None, rho).probs, born_distribution(a, rho).probs)
    commuting = 0.0
    for _ in range(20):
        a = np.kron(random_observable(2, rng).matrix, np.eye(3))
        b = np.kron(np.eye(2), random_observable(3, rng).matrix)
        rho = random_density(6, rng)
        ref = commuting_joint([a, b], rho)
        commuting = max(commuting,
                        successive_joint([a, b], [0.5, 1.0], None, rho).max_abs_diff(ref),
                        successive_joint([b, a], [0.5, 1.0], None, rho).transpose().max_abs_diff(ref))
    sx, sz = np.array([[0, 1], [1, 0]]), np.diag([1.0, -1.0])
    hand = float(np.max(np.abs(successive_joint([sx, sz], [1.0, 2.0], None, np.diag([1.0, 0])).probs - 0.25)))
    ok = exact and commuting < 1e-10 and hand < 1e-12
    record_criterion(10, f"rules: n=1 exact={exact}, commuting {commuting:.1e}, 1/4 gap {hand:.1e}",
                     max(commuting, hand), 1e-10, ok)
    assert ok


def test_criterion_11_cli_determinism(record_criterion):
    cmd = [sys.executable, "-m", "qreduction", "verify", "--seed", "42", "--trials", "25", "--output", "json"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    identical = first.stdout == second.stdout and len(first.stdout) > 0
    ok = first.returncode == 0 and second.returncode == 0 and identical
    record_criterion(11, f"CLI verify exit codes {first.returncode}/{second.returncode}, "
                         f"byte-identical={identical}", None, None, ok)
    assert ok, first.stderr.decode()
