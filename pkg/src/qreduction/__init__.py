"""Indirect quantum measurement models and the state reduction they induce.

The posterior state of a measured system is derived from the joint
statistics of the apparatus probe and later measurements of the system,
conditioned on the probe outcome, without applying any update rule to the
probe itself. Every derived quantity can be compared against a brute-force
simulation of the apparatus + object composite.
"""

from .errors import (
    CommutativityError,
    ConditioningError,
    DimensionError,
    HermiticityError,
    NormalizationError,
    ParameterError,
    PositivityError,
    QuantumError,
    ReconstructionError,
    UnitarityError,
    UnsupportedError,
)
from .linalg import (
    Tolerance,
    adjoint,
    hermitian_spectral,
    is_psd,
    is_unitary,
    max_abs_diff,
    partial_trace,
    propagator,
    tensor_product,
    trace,
)
from .objects import (
    BranchOutcome,
    DensityOperator,
    Instrument,
    Observable,
    Povm,
    StateVector,
    apply_instrument,
    choi_matrix,
    commutes,
    mix,
    pure_state,
)
from .dynamics import Hamiltonian, evolve_state, heisenberg_projector
from .rules import (
    JointTable,
    OutcomeDistribution,
    bayes_posterior,
    bayes_prior,
    born_distribution,
    commuting_joint,
    projection_postulate_update,
    successive_joint,
)
from .model import (
    MeasurementModel,
    TransducerSpec,
    build_transducer,
    induced_instrument,
    interaction_unitary,
    outcome_distribution,
    photon_counting_spec,
    posterior_state,
    prior_state,
    probe_joint_table,
    von_neumann_spec,
)
from .local import (
    JointOperatorMeasure,
    LocalSetup,
    affinity_check,
    joint_formula,
    joint_simulated,
    marginal_checks,
    no_signaling_check,
    reconstruct_joint_measure,
)

__all__ = [
    "CommutativityError",
    "ConditioningError",
    "DimensionError",
    "HermiticityError",
    "NormalizationError",
    "ParameterError",
    "PositivityError",
    "QuantumError",
    "ReconstructionError",
    "UnitarityError",
    "UnsupportedError",
    "Tolerance",
    "adjoint",
    "hermitian_spectral",
    "is_psd",
    "is_unitary",
    "max_abs_diff",
    "partial_trace",
    "propagator",
    "tensor_product",
    "trace",
    "BranchOutcome",
    "DensityOperator",
    "Instrument",
    "Observable",
    "Povm",
    "StateVector",
    "apply_instrument",
    "choi_matrix",
    "commutes",
    "mix",
    "pure_state",
    "Hamiltonian",
    "evolve_state",
    "heisenberg_projector",
    "JointTable",
    "OutcomeDistribution",
    "bayes_posterior",
    "bayes_prior",
    "born_distribution",
    "commuting_joint",
    "projection_postulate_update",
    "successive_joint",
    "MeasurementModel",
    "TransducerSpec",
    "build_transducer",
    "induced_instrument",
    "interaction_unitary",
    "outcome_distribution",
    "photon_counting_spec",
    "posterior_state",
    "prior_state",
    "probe_joint_table",
    "von_neumann_spec",
    "JointOperatorMeasure",
    "LocalSetup",
    "affinity_check",
    "joint_formula",
    "joint_simulated",
    "marginal_checks",
    "no_signaling_check",
    "reconstruct_joint_measure",
]

__version__ = "0.1.0"
