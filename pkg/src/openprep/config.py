"""Scenario configuration: YAML documents -> validated simulation objects.

Matrix literals are lists of rows whose entries are ``[re, im]`` pairs (a bare
number is accepted as a real entry). Every problem found while loading is
collected as a finding ``"<dotted.field>: <message>"`` so one pass reports
all of them.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import sampling
from .channels import PAULI, KrausChannel, unitary_channel
from .dynamics import GATES, JointDynamics
from .errors import ConfigError, OpenPrepError
from .preparations import MultiPin, Projective, Stochastic, rotation_between
from .qmath import CP_TOL, PROBABILITY_TOL
from .states import (
    BLOCH_STATES,
    BipartiteState,
    DensityMatrix,
    PureStateVector,
    bell_phi_plus,
    bloch_state,
    product_state,
    pure_density,
    werner_family,
)
from .tomography import Observable

FORMATS = ("table", "json", "csv")

SINGLE_QUBIT_GATES = {
    "I": PAULI["I"],
    "X": PAULI["X"],
    "Y": PAULI["Y"],
    "Z": PAULI["Z"],
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
}

DEFAULT_TOLERANCES = {"cp": CP_TOL, "probability": PROBABILITY_TOL}


@dataclass
class ScenarioConfig:
    name: str
    description: str
    initial_state: BipartiteState
    input_names: list[str]
    inputs: list[PureStateVector]
    procedures: list[tuple[str, Any]]
    dynamics: JointDynamics
    dynamics_label: str
    tomography: bool
    observables: list[Observable]
    tolerances: dict[str, float]
    seed: int
    format: str
    raw: dict = field(default_factory=dict)


class _Findings:
    def __init__(self):
        self.items: list[str] = []

    def add(self, where: str, msg: str):
        self.items.append(f"{where}: {msg}")

    def guard(self, where: str, fn, *args):
        """Run ``fn``; on a library/parse error record it and return ``None``."""
        try:
            return fn(*args)
        except (OpenPrepError, ValueError, TypeError, KeyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            self.add(where, str(msg))
            return None


# -- literals ---------------------------------------------------------------


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"not a number: {x!r}")
    return complex(float(x))


def parse_matrix(lit) -> np.ndarray:
    if not isinstance(lit, list) or not lit or not all(isinstance(r, list) for r in lit):
        raise ValueError("matrix literal must be a list of rows")
    rows = [[parse_complex(x) for x in row] for row in lit]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError(f"matrix literal must be square, got {n} rows of lengths {[len(r) for r in rows]}")
    return np.array(rows, dtype=complex)


def parse_vector(lit) -> np.ndarray:
    if not isinstance(lit, list) or not lit:
        raise ValueError("vector literal must be a non-empty list")
    return np.array([parse_complex(x) for x in lit], dtype=complex)


def matrix_literal(m) -> list:
    """Inverse of :func:`parse_matrix`; ``-0.0`` is written as ``0.0``."""
    m = np.asarray(m)
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in m]


# -- states -----------------------------------------------------------------


def parse_pure(spec) -> tuple[str, PureStateVector]:
    if isinstance(spec, str):
        name = {"0": "z+", "1": "z-"}.get(spec.strip(), spec.strip())
        return name, bloch_state(name)
    if isinstance(spec, dict) and "vector" in spec:
        return spec.get("name", "vector"), PureStateVector(parse_vector(spec["vector"]))
    if isinstance(spec, list):
        return "vector", PureStateVector(parse_vector(spec))
    raise ValueError(f"expected a state name from {sorted(BLOCH_STATES)} or a vector literal")


def parse_density(spec, dim: int = 2) -> DensityMatrix:
    if isinstance(spec, str) and spec.strip() in ("mixed", "maximally_mixed"):
        return DensityMatrix(np.eye(dim) / dim)
    if isinstance(spec, dict) and "matrix" in spec:
        return DensityMatrix(parse_matrix(spec["matrix"]))
    return pure_density(parse_pure(spec)[1])


_WERNER = re.compile(r"^werner\s+p\s*=\s*([0-9.eE+-]+)$")


def parse_initial_state(spec, seed: int) -> BipartiteState:
    if isinstance(spec, str):
        s = spec.strip()
        if s == "bell_phi_plus":
            return bell_phi_plus()
        if m := _WERNER.match(s):
            return werner_family(float(m.group(1)))
        if s.startswith("product "):
            parts = s.split()
            if len(parts) != 3:
                raise ValueError("use 'product <system-state> <environment-state>'")
            return product_state(parse_density(parts[1]), parse_density(parts[2]))
        if s == "random":
            return sampling.random_bipartite(2, 2, np.random.default_rng(seed))
        raise ValueError(f"unknown state constructor {s!r}")
    if not isinstance(spec, dict):
        raise ValueError("state must be a constructor string or a mapping")
    if "werner" in spec:
        return werner_family(float(spec["werner"]))
    if "product" in spec:
        p = spec["product"]
        return product_state(parse_density(p["system"]), parse_density(p["environment"]))
    if "random" in spec:
        opts = spec["random"] or {}
        return sampling.random_bipartite(
            int(opts.get("dim_s", 2)), int(opts.get("dim_e", 2)),
            np.random.default_rng(seed), rank=opts.get("rank"),
        )
    if "matrix" in spec:
        m = DensityMatrix(parse_matrix(spec["matrix"]))
        dim_s = int(spec.get("dim_s", 2))
        dim_e = int(spec.get("dim_e", m.dim // dim_s))
        return BipartiteState(dim_s, dim_e, m)
    raise ValueError("state mapping needs one of: werner, product, random, matrix")


# -- operators --------------------------------------------------------------


def parse_unitary_1q(spec) -> np.ndarray:
    """A single-qubit gate name, a list of names applied left to right, or a literal."""
    if isinstance(spec, str):
        try:
            return SINGLE_QUBIT_GATES[spec.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown gate {spec!r}; expected one of {sorted(SINGLE_QUBIT_GATES)}") from None
    if isinstance(spec, list) and spec and all(isinstance(s, str) for s in spec):
        u = np.eye(2, dtype=complex)
        for s in spec:
            u = parse_unitary_1q(s) @ u
        return u
    if isinstance(spec, dict) and "unitary" in spec:
        return parse_matrix(spec["unitary"])
    raise ValueError("expected a gate name, a list of gate names, or {unitary: literal}")


def parse_channel(spec) -> KrausChannel:
    if isinstance(spec, dict) and "kraus" in spec:
        return KrausChannel(tuple(parse_matrix(k) for k in spec["kraus"]))
    return unitary_channel(parse_unitary_1q(spec))


def _pauli_sum(terms: dict) -> np.ndarray:
    h = None
    for word, coeff in terms.items():
        op = np.array([[1]], dtype=complex)
        for ch in str(word).upper():
            op = np.kron(op, PAULI[ch])
        h = float(coeff) * op if h is None else h + float(coeff) * op
    if h is None:
        raise ValueError("empty Pauli sum")
    return h


def parse_dynamics(spec) -> tuple[str, JointDynamics]:
    if isinstance(spec, str):
        name = spec.strip().upper()
        if name == "IDENTITY":
            return "identity", JointDynamics(np.eye(4))
        if name not in GATES:
            raise ValueError(f"unknown gate {spec!r}; expected one of {sorted(GATES)} or identity")
        return name, JointDynamics.gate(name)
    if not isinstance(spec, dict):
        raise ValueError("dynamics must be a gate name or a mapping")
    if "gate" in spec:
        return parse_dynamics(spec["gate"])
    if "unitary" in spec:
        return "unitary", JointDynamics(parse_matrix(spec["unitary"]))
    if "factorized" in spec:
        us, ue = spec["factorized"]
        return "factorized", JointDynamics.factorized(parse_unitary_1q(us), parse_unitary_1q(ue))
    if "hamiltonian" in spec:
        h = spec["hamiltonian"]
        h = _pauli_sum(h["pauli"]) if isinstance(h, dict) and "pauli" in h else parse_matrix(h)
        if "duration" not in spec:
            raise ValueError("hamiltonian dynamics needs a duration")
        return "hamiltonian", JointDynamics.from_hamiltonian(h, float(spec["duration"]))
    raise ValueError("dynamics mapping needs one of: gate, unitary, factorized, hamiltonian")


def parse_observable(spec) -> Observable:
    if isinstance(spec, str):
        name = spec.strip().upper()
        if name not in PAULI:
            raise ValueError(f"unknown observable {spec!r}")
        return Observable(PAULI[name], name)
    if isinstance(spec, dict) and "matrix" in spec:
        return Observable(parse_matrix(spec["matrix"]), spec.get("name", "M"))
    raise ValueError("observable must be a Pauli name or {name, matrix}")


# -- procedures -------------------------------------------------------------


def parse_procedure(spec: dict, inputs: list[PureStateVector], where: str, findings: _Findings):
    kind = spec.get("kind")
    if kind == "projective":
        return findings.guard(where, Projective, tuple(inputs))
    if kind == "stochastic":
        if "pin" not in spec:
            findings.add(f"{where}.pin", "stochastic preparation needs a pin state")
            return None
        pin = findings.guard(f"{where}.pin", lambda: parse_pure(spec["pin"])[1])
        if pin is None:
            return None
        rots_spec = spec.get("rotations", "auto")
        if rots_spec == "auto":
            rots = [rotation_between(pin, v) for v in inputs]
        else:
            if not isinstance(rots_spec, list) or len(rots_spec) != len(inputs):
                findings.add(f"{where}.rotations", f"need one rotation per input ({len(inputs)})")
                return None
            rots = [findings.guard(f"{where}.rotations[{i}]", parse_channel, r) for i, r in enumerate(rots_spec)]
            if any(r is None for r in rots):
                return None
        return findings.guard(f"{where}.rotations", Stochastic, pin, tuple(rots), tuple(inputs))
    if kind == "multipin":
        actions = spec.get("env_actions", [None] * len(inputs))
        if not isinstance(actions, list) or len(actions) != len(inputs):
            findings.add(f"{where}.env_actions", f"need one environment action per input ({len(inputs)})")
            return None
        qs = []
        for i, a in enumerate(actions):
            qs.append(None if a is None else findings.guard(f"{where}.env_actions[{i}]", parse_channel, a))
            if a is not None and qs[-1] is None:
                return None
        return findings.guard(where, MultiPin, tuple(zip(inputs, qs)))
    findings.add(f"{where}.kind", f"expected projective, stochastic or multipin, got {kind!r}")
    return None


# -- top level --------------------------------------------------------------


def _check_dims(cfg_state, inputs, procedures, dynamics, observables, findings: _Findings):
    if cfg_state is None:
        return
    ds, de = cfg_state.dim_s, cfg_state.dim_e
    if dynamics is not None and dynamics.dim != ds * de:
        findings.add("dynamics", f"acts on dimension {dynamics.dim} but the state is {ds}x{de} = {ds * de}")
    for i, v in enumerate(inputs):
        if v.dim != ds:
            findings.add(f"inputs[{i}]", f"has dimension {v.dim}, system dimension is {ds}")
    for label, proc in procedures:
        if isinstance(proc, MultiPin):
            for i, (_, q) in enumerate(proc.pins):
                if q is not None and q.dim != de:
                    findings.add(f"procedures[{label}].env_actions[{i}]", f"acts on dimension {q.dim}, environment is {de}")
    for i, o in enumerate(observables):
        if o.matrix.shape[0] != ds:
            findings.add(f"observables[{i}]", f"has dimension {o.matrix.shape[0]}, system dimension is {ds}")


def build_config(data: Any, seed: int | None = None, tolerance_overrides: dict | None = None) -> ScenarioConfig:
    """Validate a parsed YAML document; raise :class:`ConfigError` listing every finding."""
    f = _Findings()
    if not isinstance(data, dict):
        raise ConfigError(["<root>: configuration must be a mapping"])
    for key in ("initial_state", "inputs", "procedures", "dynamics"):
        if key not in data:
            f.add(key, "missing required field")
    if f.items:
        raise ConfigError(f.items)

    if seed is None:
        seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        f.add("seed", "must be an integer")
        seed = 0

    state = f.guard("initial_state", parse_initial_state, data["initial_state"], seed)

    input_names, inputs = [], []
    inputs_ok = isinstance(data["inputs"], list) and bool(data["inputs"])
    if not inputs_ok:
        f.add("inputs", "must be a non-empty list of states")
    else:
        for i, s in enumerate(data["inputs"]):
            got = f.guard(f"inputs[{i}]", parse_pure, s)
            if got is not None:
                input_names.append(got[0])
                inputs.append(got[1])
            else:
                inputs_ok = False

    procedures = []
    specs = data["procedures"]
    if not isinstance(specs, list) or not specs:
        f.add("procedures", "must be a non-empty list")
        specs = []
    labels = set()
    if inputs_ok:
        for i, spec in enumerate(specs):
            if not isinstance(spec, dict):
                f.add(f"procedures[{i}]", "must be a mapping")
                continue
            label = str(spec.get("label", spec.get("kind", f"procedure-{i}")))
            if label in labels:
                f.add(f"procedures[{i}].label", f"duplicate label {label!r}")
            labels.add(label)
            proc = parse_procedure(spec, inputs, f"procedures[{i}]", f)
            if proc is not None:
                procedures.append((label, proc))

    dyn = f.guard("dynamics", parse_dynamics, data["dynamics"])
    dyn_label, dynamics = dyn if dyn is not None else (None, None)

    observables = []
    for i, o in enumerate(data.get("observables", []) or []):
        got = f.guard(f"observables[{i}]", parse_observable, o)
        if got is not None:
            observables.append(got)

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in {**(data.get("tolerances") or {}), **(tolerance_overrides or {})}.items():
        if key not in DEFAULT_TOLERANCES:
            f.add(f"tolerances.{key}", f"unknown tolerance; expected one of {sorted(DEFAULT_TOLERANCES)}")
            continue
        try:
            v = float(value)
        except (TypeError, ValueError):
            f.add(f"tolerances.{key}", f"not a number: {value!r}")
            continue
        if not v > 0:
            f.add(f"tolerances.{key}", "must be positive")
            continue
        tolerances[key] = v

    fmt = data.get("format", "table")
    if fmt not in FORMATS:
        f.add("format", f"expected one of {FORMATS}, got {fmt!r}")

    tomo = data.get("tomography", False)
    if not isinstance(tomo, bool):
        f.add("tomography", "must be true or false")

    _check_dims(state, inputs, procedures, dynamics, observables, f)
    if f.items:
        raise ConfigError(f.items)
    return ScenarioConfig(
        name=str(data.get("name", "scenario")),
        description=str(data.get("description", "")),
        initial_state=state,
        input_names=input_names,
        inputs=inputs,
        procedures=procedures,
        dynamics=dynamics,
        dynamics_label=dyn_label,
        tomography=tomo,
        observables=observables,
        tolerances=tolerances,
        seed=seed,
        format=fmt,
        raw=data,
    )


def read_yaml(path: str | Path) -> Any:
    """Parse a YAML file, turning syntax errors into a line-referenced ConfigError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"<file>: cannot read {path}: {exc.strerror}"]) from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "<parse>"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([f"{where}: {problem}"]) from exc


def load_config(path: str | Path, seed: int | None = None, tolerance_overrides: dict | None = None) -> ScenarioConfig:
    return build_config(read_yaml(path), seed, tolerance_overrides)


def validate_config(path: str | Path) -> list[str]:
    """Findings for the config at ``path``; empty iff it loads cleanly."""
    try:
        load_config(path)
    except ConfigError as exc:
        return exc.findings
    return []
