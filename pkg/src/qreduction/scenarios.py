"""Scenario files: parsing, validation and execution.

A scenario is a JSON object ``{"name", "kind", "payload"}`` with ``kind`` one
of ``model_run``, ``local_theorem`` or ``bayes_demo``. Complex numbers are
written as plain numbers or ``[re, im]`` pairs and matrices as row-major
nested lists; named presets keep files short. See ``README.md`` for the
payload fields of each kind.

Running a scenario produces a result dictionary
``{"scenario", "distributions", "states", "joints", "checks", "violations"}``.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import numpy as np

from .dynamics import Hamiltonian
from .errors import QuantumError
from .local import (
    LocalSetup,
    a_marginal_formula,
    b_marginal_formula,
    joint_formula,
    joint_simulated,
    marginal_checks,
)
from .model import (
    MeasurementModel,
    TransducerSpec,
    branch_state,
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
from .objects import DensityOperator, Observable, StateVector, apply_instrument
from .rules import JointTable, OutcomeDistribution, bayes_posterior, bayes_prior, born_distribution
from . import sampling

__all__ = [
    "ScenarioError",
    "SCENARIO_SCHEMA",
    "RESULT_SCHEMA",
    "BUILTIN_NAMES",
    "load_builtin",
    "load_scenario",
    "validate_scenario",
    "run_scenario",
    "parse_matrix",
    "parse_ket",
    "parse_state",
]

BUILTIN_NAMES = ["qubit-vn", "photon-counting", "epr-local", "transducer-random", "bayes-table"]

DEFAULT_CHECK_TOLS = {
    "probability_sum": 1e-9,
    "nonselective_decomposition": 1e-9,
    "statistical_formula": 1e-10,
    "instrument_normalization": 1e-9,
    "instrument_cp": 1e-8,
    "instrument_equivalence": 1e-9,
    "quantum_bayes": 1e-9,
    "theorem_equivalence": 1e-9,
    "a_marginal": 1e-9,
    "no_signaling": 1e-9,
    "marginal_reconstruction": 1e-8,
    "bayes_reweighting": 1e-12,
}


class ScenarioError(Exception):
    """Malformed or inconsistent scenario input."""


_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {
    "oneOf": [
        {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}},
        {"type": "object", "required": ["preset"]},
        {"type": "object", "required": ["kron"]},
    ]
}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "kind", "payload"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": ["model_run", "local_theorem", "bayes_demo"]},
        "description": {"type": "string"},
        "payload": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "model_run"}}},
            "then": {"properties": {"payload": {
                "required": ["model", "state"],
                "properties": {
                    "model": {"type": "object", "required": ["type"]},
                    "state": {"type": "object"},
                    "observables": {"type": "array", "items": _MATRIX},
                    "hamiltonian": _MATRIX,
                    "tau": {"type": "number", "minimum": 0},
                    "seed": {"type": "integer", "minimum": 0},
                    "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
                },
            }}},
        },
        {
            "if": {"properties": {"kind": {"const": "local_theorem"}}},
            "then": {"properties": {"payload": {
                "required": ["model", "state", "a_obs", "b_obs", "t1", "dt", "t2"],
                "properties": {
                    "model": {"type": "object", "required": ["type"]},
                    "state": {"type": "object"},
                    "a_obs": _MATRIX,
                    "b_obs": _MATRIX,
                    "h1": _MATRIX,
                    "h2": _MATRIX,
                    "h_apparatus": _MATRIX,
                    "t1": {"type": "number", "minimum": 0},
                    "dt": {"type": "number", "minimum": 0},
                    "t2": {"type": "number", "minimum": 0},
                    "marginal_checks": {"type": "boolean"},
                    "seed": {"type": "integer", "minimum": 0},
                    "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
                },
            }}},
        },
        {
            "if": {"properties": {"kind": {"const": "bayes_demo"}}},
            "then": {"properties": {"payload": {
                "required": ["x_labels", "y_labels", "probs"],
                "properties": {
                    "x_labels": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "y_labels": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "probs": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                    "condition_on": {"type": "array", "items": {"type": "number"}},
                    "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
                },
            }}},
        },
    ],
}

_ENTRY = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

RESULT_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["scenario", "distributions", "states", "joints", "checks", "violations"],
    "additionalProperties": False,
    "properties": {
        "scenario": {
            "type": "object",
            "required": ["name", "kind"],
            "properties": {"name": {"type": "string"}, "kind": {"type": "string"}},
        },
        "distributions": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "labels", "probs"],
            "properties": {
                "name": {"type": "string"},
                "labels": {"type": "array", "items": {"type": "number"}},
                "probs": {"type": "array", "items": {"type": "number"}},
            },
        }},
        "states": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "matrix"],
            "properties": {
                "name": {"type": "string"},
                "matrix": {"type": ["array", "null"], "items": {"type": "array", "items": _ENTRY}},
            },
        }},
        "joints": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "axes", "labels", "probs"],
            "properties": {
                "name": {"type": "string"},
                "axes": {"type": "array", "items": {"type": "string"}},
                "labels": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "probs": {"type": "array"},
            },
        }},
        "checks": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "value", "tol", "passed"],
            "properties": {
                "name": {"type": "string"},
                "value": {"type": "number"},
                "tol": {"type": "number"},
                "passed": {"type": "boolean"},
            },
        }},
        "violations": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "magnitude", "tol"],
            "properties": {
                "name": {"type": "string"},
                "magnitude": {"type": "number"},
                "tol": {"type": "number"},
            },
        }},
    },
}


# -- parsing -----------------------------------------------------------------

_SQ = 1 / np.sqrt(2)
_MATRIX_PRESETS = {
    "sigma_x": lambda dim: np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": lambda dim: np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma_z": lambda dim: np.array([[1, 0], [0, -1]], dtype=complex),
    "identity": lambda dim: np.eye(dim, dtype=complex),
    "zero": lambda dim: np.zeros((dim, dim), dtype=complex),
    "number": lambda dim: np.diag(np.arange(dim)).astype(complex),
}
_KET_PRESETS = {
    "zero": [1, 0],
    "one": [0, 1],
    "plus": [_SQ, _SQ],
    "minus": [_SQ, -_SQ],
    "bell_phi_plus": [_SQ, 0, 0, _SQ],
    "bell_phi_minus": [_SQ, 0, 0, -_SQ],
    "bell_psi_plus": [0, _SQ, _SQ, 0],
    "bell_psi_minus": [0, _SQ, -_SQ, 0],
}


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def parse_matrix(spec) -> np.ndarray:
    """Matrix from nested lists, ``{"preset": name, "dim": n}`` or ``{"kron": [...]}``."""
    if isinstance(spec, dict):
        if "kron" in spec:
            factors = [parse_matrix(f) for f in spec["kron"]]
            if not factors:
                raise ScenarioError("'kron' needs at least one factor")
            out = factors[0]
            for f in factors[1:]:
                out = np.kron(out, f)
            return out
        name = spec.get("preset")
        if name not in _MATRIX_PRESETS:
            raise ScenarioError(f"unknown matrix preset {name!r}")
        dim = int(spec.get("dim", 2))
        if dim < 1:
            raise ScenarioError("preset dim must be positive")
        return _MATRIX_PRESETS[name](dim)
    rows = [[_complex(x) for x in row] for row in spec]
    if any(len(r) != len(rows) for r in rows):
        raise ScenarioError("matrices must be square")
    return np.array(rows, dtype=complex)


def parse_ket(spec) -> StateVector:
    """Ket from a list, ``{"preset": ...}``, ``{"basis": n, "dim": d}`` or
    ``{"amplitudes": [...], "normalize": true}``."""
    if isinstance(spec, dict):
        if "preset" in spec:
            if spec["preset"] not in _KET_PRESETS:
                raise ScenarioError(f"unknown ket preset {spec['preset']!r}")
            return StateVector(_KET_PRESETS[spec["preset"]], normalize=True)
        if "basis" in spec:
            dim, n = int(spec["dim"]), int(spec["basis"])
            if not 0 <= n < dim:
                raise ScenarioError(f"basis index {n} out of range for dim {dim}")
            return StateVector(np.eye(dim)[n])
        if "amplitudes" in spec:
            return StateVector([_complex(x) for x in spec["amplitudes"]],
                               normalize=bool(spec.get("normalize", False)))
        raise ScenarioError(f"cannot parse ket {spec!r}")
    return StateVector([_complex(x) for x in spec])


def parse_state(spec) -> DensityOperator:
    """State from ``{"ket": ...}``, ``{"density": matrix, "normalize"?}`` or ``{"kron": [...]}``."""
    if not isinstance(spec, dict):
        raise ScenarioError("state must be an object")
    if "ket" in spec:
        v = parse_ket(spec["ket"]).amplitudes
        return DensityOperator(np.outer(v, v.conj()))
    if "density" in spec:
        m = parse_matrix(spec["density"])
        if spec.get("normalize"):
            m = m / np.trace(m).real
        return DensityOperator(m)
    if "kron" in spec:
        out = np.ones((1, 1), dtype=complex)
        for part in spec["kron"]:
            out = np.kron(out, parse_state(part).matrix)
        return DensityOperator(out)
    raise ScenarioError(f"cannot parse state {spec!r}")


def parse_model(spec, rng: np.random.Generator, measured: Optional[Observable] = None) -> MeasurementModel:
    kind = spec["type"]
    if "measured" in spec:
        measured = Observable(parse_matrix(spec["measured"]))
    if kind == "von_neumann":
        if measured is None:
            raise ScenarioError("von_neumann model needs 'measured'")
        return build_transducer(von_neumann_spec(measured, spec.get("apparatus_dim")))
    if kind == "photon_counting":
        return build_transducer(photon_counting_spec(int(spec["dim"])))
    if kind == "transducer":
        if measured is None:
            raise ScenarioError("transducer model needs 'measured'")
        posts = spec.get("post_states")
        return build_transducer(TransducerSpec(
            measured,
            parse_ket(spec["xi"]),
            [parse_ket(p) for p in spec["pointers"]],
            None if posts is None else [parse_ket(p) for p in posts],
        ))
    if kind == "random_transducer":
        d = measured.dim if measured is not None else int(spec["object_dim"])
        return sampling.random_transducer(
            d, int(spec.get("apparatus_dim", d)), rng,
            projective=bool(spec.get("projective", False)), measured=measured,
        )
    if kind == "explicit":
        return MeasurementModel(parse_state(spec["sigma"]), parse_matrix(spec["u"]),
                                Observable(parse_matrix(spec["probe"])), measured)
    if kind == "interaction":
        u = interaction_unitary(
            parse_matrix(spec["h_int"]), float(spec.get("coupling", 1.0)), float(spec["dt"]),
            h_object=parse_matrix(spec["h_object"]) if "h_object" in spec else None,
        )
        return MeasurementModel(parse_state(spec["sigma"]), u, Observable(parse_matrix(spec["probe"])),
                                measured, float(spec["dt"]))
    raise ScenarioError(f"unknown model type {kind!r}")


# -- loading -------------------------------------------------------------------

def validate_scenario(data) -> dict:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"schema violation at {list(exc.absolute_path)}: {exc.message}") from None
    return data


def load_builtin(name: str) -> dict:
    if name not in BUILTIN_NAMES:
        raise ScenarioError(f"unknown built-in scenario {name!r}")
    text = (resources.files(__package__) / "scenarios" / f"{name}.json").read_text(encoding="utf-8")
    return validate_scenario(json.loads(text))


def load_scenario(ref: str) -> dict:
    """Load a scenario by file path or built-in name."""
    path = Path(ref)
    if path.is_file():
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read {ref}: {exc}") from None
        return validate_scenario(data)
    if ref in BUILTIN_NAMES:
        return load_builtin(ref)
    raise ScenarioError(f"no scenario file or built-in named {ref!r}")


# -- execution -----------------------------------------------------------------

class _Report:
    def __init__(self, scenario: dict, precision: int, tolerances: Dict[str, float]):
        self.precision = precision
        self.tolerances = {**DEFAULT_CHECK_TOLS, **tolerances}
        self.data: Dict[str, Any] = {
            "scenario": {"name": scenario["name"], "kind": scenario["kind"]},
            "distributions": [],
            "states": [],
            "joints": [],
            "checks": [],
            "violations": [],
        }

    def _num(self, x: float) -> float:
        return round(float(x), self.precision) + 0.0

    def distribution(self, name: str, dist: OutcomeDistribution):
        self.data["distributions"].append({
            "name": name,
            "labels": [self._num(a) for a in dist.labels],
            "probs": [self._num(p) for p in dist.probs],
        })

    def state(self, name: str, m: Optional[np.ndarray]):
        matrix = None if m is None else [[[self._num(z.real), self._num(z.imag)] for z in row] for row in m]
        self.data["states"].append({"name": name, "matrix": matrix})

    def joint(self, name: str, axes: List[str], table: JointTable):
        self.data["joints"].append({
            "name": name,
            "axes": axes,
            "labels": [[self._num(a) for a in l] for l in table.labels],
            "probs": np.vectorize(self._num)(table.probs).tolist(),
        })

    def check(self, name: str, value: float, family: Optional[str] = None):
        tol = self.tolerances[family or name]
        passed = bool(value < tol)
        # magnitudes are reported in scientific notation, not rounded away
        value = float(f"{float(value):.3e}")
        self.data["checks"].append({"name": name, "value": value, "tol": tol, "passed": passed})
        if not passed:
            self.data["violations"].append({"name": name, "magnitude": value, "tol": tol})


def _gap(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _run_model(payload: dict, rep: _Report, rng):
    model = parse_model(payload["model"], rng)
    rho = parse_state(payload["state"])
    dist = outcome_distribution(model, rho)
    rep.distribution("outcomes", dist)
    rep.check("probability_sum", abs(dist.probs.sum() - 1.0))
    prior = prior_state(model, rho)
    rep.state("prior", prior.matrix)
    posts = {}
    for a, p in zip(dist.labels, dist.probs):
        post = posterior_state(model, rho, a) if p > 1e-12 else None
        posts[a] = post
        rep.state(f"posterior[{rep._num(a):g}]", None if post is None else post.matrix)
    total = sum(branch_state(model, rho, a) for a in dist.labels)
    rep.check("nonselective_decomposition", _gap(prior.matrix, total))
    if model.measured is not None:
        born = born_distribution(model.measured, rho)
        rep.distribution("born", born)
        rep.check("statistical_formula", dist.max_abs_diff(born))

    inst = induced_instrument(model)
    rep.check("instrument_normalization", inst.normalization_error())
    rep.check("instrument_cp", max(0.0, -min(inst.choi_min_eigenvalues())))
    worst = 0.0
    for branch in apply_instrument(inst, rho):
        worst = max(worst, abs(branch.probability - dist.prob(branch.label)))
        if branch.post_state is not None and posts.get(branch.label) is not None:
            worst = max(worst, _gap(branch.post_state.matrix, posts[branch.label].matrix))
    rep.check("instrument_equivalence", worst)

    h = Hamiltonian(parse_matrix(payload["hamiltonian"])) if "hamiltonian" in payload else None
    tau = float(payload.get("tau", 0.0))
    for k, spec in enumerate(payload.get("observables", [])):
        b = Observable(parse_matrix(spec))
        table = probe_joint_table(model, rho, b, h=h, tau=tau)
        rep.joint(f"B{k}|probe", [f"B{k}", "probe"], table)
        worst = 0.0
        for a, p in zip(dist.labels, dist.probs):
            if p <= 1e-6:
                continue
            post = posts[a].matrix
            if h is not None and tau:
                u = h.propagator(tau)
                post = u @ post @ u.conj().T
            quantum = born_distribution(b, DensityOperator(post))
            worst = max(worst, bayes_posterior(table, a).max_abs_diff(quantum))
        rep.check(f"quantum_bayes[B{k}]", worst, "quantum_bayes")


def _run_local(payload: dict, rep: _Report, rng):
    a_obs = Observable(parse_matrix(payload["a_obs"]))
    b_obs = Observable(parse_matrix(payload["b_obs"]))
    d1, d2 = a_obs.dim, b_obs.dim
    h1 = parse_matrix(payload["h1"]) if "h1" in payload else np.zeros((d1, d1))
    h2 = parse_matrix(payload["h2"]) if "h2" in payload else np.zeros((d2, d2))
    model = parse_model(payload["model"], rng, measured=a_obs)
    setup = LocalSetup(
        h1=Hamiltonian(h1), h2=Hamiltonian(h2), model=model, a_obs=a_obs, b_obs=b_obs,
        t1=float(payload["t1"]), dt=float(payload["dt"]), t2=float(payload["t2"]),
        rho0=parse_state(payload["state"]),
        h_apparatus=Hamiltonian(parse_matrix(payload["h_apparatus"])) if "h_apparatus" in payload else None,
    )
    formula = joint_formula(setup)
    simulated = joint_simulated(setup)
    rep.joint("formula", ["A", "B"], formula)
    rep.joint("simulated", ["probe", "B"], simulated)
    rep.distribution("A marginal", simulated.marginal(0))
    rep.distribution("B marginal", simulated.marginal(1))
    rep.check("theorem_equivalence", simulated.max_abs_diff(formula))
    rep.check("a_marginal", simulated.marginal(0).max_abs_diff(a_marginal_formula(setup)))
    rep.check("no_signaling", simulated.marginal(1).max_abs_diff(b_marginal_formula(setup)))
    if payload.get("marginal_checks", d1 * d2 <= 9):
        r = marginal_checks(setup)
        rep.check("marginal_reconstruction[a_marginal]", r.a_marginal_error, "marginal_reconstruction")
        rep.check("marginal_reconstruction[b_marginal]", r.b_marginal_error, "marginal_reconstruction")
        rep.check("marginal_reconstruction[product]",
                  max(r.product_error, r.closed_form_error), "marginal_reconstruction")
        rep.check("marginal_reconstruction[psd]", max(0.0, -r.min_eigenvalue), "marginal_reconstruction")


def _run_bayes(payload: dict, rep: _Report, rng):
    table = JointTable([payload["x_labels"], payload["y_labels"]], payload["probs"])
    prior = bayes_prior(table)
    rep.joint("table", ["X", "Y"], table)
    rep.distribution("prior", prior)
    y_dist = table.marginal(1)
    conds = payload.get("condition_on", [y for y, p in zip(y_dist.labels, y_dist.probs) if p > 1e-12])
    recombined = np.zeros(len(prior.labels))
    for y in conds:
        post = bayes_posterior(table, y)
        rep.distribution(f"posterior[Y={rep._num(y):g}]", post)
        recombined += y_dist.prob(y) * post.probs
    if "condition_on" not in payload:
        rep.check("bayes_reweighting", _gap(recombined, prior.probs))


_RUNNERS = {"model_run": _run_model, "local_theorem": _run_local, "bayes_demo": _run_bayes}


def run_scenario(scenario: dict, precision: int = 12) -> dict:
    """Execute a validated scenario and return the result dictionary.

    Raises :class:`ScenarioError` for input that is well-formed JSON but
    physically inconsistent (wrong dimensions, non-Hermitian observables...).
    """
    validate_scenario(scenario)
    payload = scenario["payload"]
    rng = np.random.default_rng(int(payload.get("seed", 0)))
    rep = _Report(scenario, precision, payload.get("tolerances", {}))
    try:
        _RUNNERS[scenario["kind"]](payload, rep, rng)
    except (QuantumError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{type(exc).__name__}: {exc}") from None
    return rep.data
