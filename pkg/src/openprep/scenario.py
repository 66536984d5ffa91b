"""Run a configured scenario end to end and render the comparative report."""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import ScenarioConfig, load_config, matrix_literal
from .dynamics import is_factorized
from .errors import ConfigError, OpenPrepError
from .preparations import environment_dependence, prepare_all
from .states import correlation_norm, trace_distance
from .tomography import diagnose, reconstruct_process, run_pipeline

SCENARIO_PACKAGE = "openprep.scenarios"


def _num(x: float) -> float:
    return float(x) + 0.0


@dataclass
class ScenarioReport:
    data: dict

    @property
    def failed(self) -> bool:
        return any(p["status"] != "ok" for p in self.data["procedures"])

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2) + "\n"

    def to_csv(self) -> str:
        obs = self.data["observables"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["procedure", "m", "input", "probability", "environment_purity", "output_purity",
                    *[f"<{o}>" for o in obs]])
        for p in self.data["procedures"]:
            for r in p["records"]:
                w.writerow([p["label"], r["m"], r["input"], repr(r["probability"]),
                            repr(r["environment_purity"]), repr(r["output_purity"]),
                            *[repr(r["expectations"][o]) for o in obs]])
        return buf.getvalue()

    def to_table(self) -> str:
        d = self.data
        out = [f"scenario: {d['scenario']}  (openprep {d['tool']['version']})"]
        if d["description"]:
            out.append(f"  {d['description']}")
        init = d["initial_state"]
        out.append(f"initial state: {init['spec']}  correlation_norm={init['correlation_norm']:.6g}")
        out.append(f"dynamics: {d['dynamics']['label']}  factorized={d['dynamics']['factorized']}")
        for p in d["procedures"]:
            out.append("")
            out.append(f"[{p['label']}] kind={p['kind']} status={p['status']}")
            if p["status"] != "ok":
                out.append(f"  error: {p['error']}")
                continue
            out.append(f"  {'m':>2}  {'input':<8} {'a_m':>10} {'env purity':>11} {'out purity':>11}")
            for r in p["records"]:
                out.append(f"  {r['m']:>2}  {r['input']:<8} {r['probability']:>10.6f} "
                           f"{r['environment_purity']:>11.6f} {r['output_purity']:>11.6f}")
            dep = p["environment_dependence"]
            out.append(f"  environment_dependence: {'n/a' if dep is None else f'{dep:.6g}'}")
            dg = p["diagnosis"]
            if dg is not None:
                out.append(f"  process: choi_min_eigenvalue={dg['choi_min_eigenvalue']:.6g} "
                           f"is_cp={dg['is_cp']} tp_deviation={dg['tp_deviation']:.3g} "
                           f"linearity_residual={dg['linearity_residual']:.3g}")
            elif p.get("diagnosis_error"):
                out.append(f"  process: {p['diagnosis_error']}")
        if d["comparisons"]:
            out.append("")
            out.append("system-output trace distance between procedures (per input):")
            for c in d["comparisons"]:
                vals = ", ".join(f"{v:.6g}" for v in c["per_input"])
                out.append(f"  {c['a']} vs {c['b']}: max={c['max']:.6g}  [{vals}]")
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "table": self.to_table}[fmt]()


def _run_procedure(cfg: ScenarioConfig, label: str, proc) -> tuple[dict, list | None]:
    entry = {"label": label, "kind": proc.kind, "status": "ok"}
    tol = cfg.tolerances
    try:
        records = run_pipeline(cfg.initial_state, proc, cfg.dynamics, None, cfg.observables, tol["probability"])
    except OpenPrepError as exc:
        entry.update(status="error", error=str(exc), records=[], environment_dependence=None, diagnosis=None)
        return entry, None
    entry["records"] = [
        {
            "m": r.input_label,
            "input": cfg.input_names[r.input_label],
            "probability": _num(r.probability),
            "environment": matrix_literal(r.environment.matrix),
            "environment_purity": _num(np.real(np.trace(r.environment.matrix @ r.environment.matrix))),
            "output": matrix_literal(r.output_state.matrix),
            "output_purity": _num(np.real(np.trace(r.output_state.matrix @ r.output_state.matrix))),
            "expectations": {o.name: _num(v) for o, v in zip(cfg.observables, r.expectations)},
        }
        for r in records
    ]
    outcomes = prepare_all(cfg.initial_state, proc, tol["probability"])
    entry["environment_dependence"] = _num(environment_dependence(outcomes)) if len(outcomes) > 1 else None
    entry["diagnosis"] = None
    if cfg.tomography:
        try:
            dg = diagnose(reconstruct_process(records), records, tol["cp"])
        except OpenPrepError as exc:
            entry.update(status="error", error=f"tomography: {exc}")
        else:
            entry["diagnosis"] = {
                "choi_min_eigenvalue": _num(dg.choi_min_eigenvalue),
                "is_cp": bool(dg.is_cp),
                "tp_deviation": _num(dg.tp_deviation),
                "linearity_residual": _num(dg.linearity_residual),
                "superoperator": matrix_literal(dg.process.matrix),
            }
    return entry, records


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Prepare, evolve and (optionally) reconstruct for every procedure in ``cfg``.

    Failures are recorded per procedure; the remaining procedures still run.
    """
    state = cfg.initial_state
    procs, outputs = [], {}
    for label, proc in cfg.procedures:
        entry, records = _run_procedure(cfg, label, proc)
        procs.append(entry)
        if records is not None:
            outputs[label] = [r.output_state for r in records]

    comparisons = []
    for a, b in itertools.combinations([lbl for lbl, _ in cfg.procedures], 2):
        if a in outputs and b in outputs:
            per = [_num(trace_distance(x, y)) for x, y in zip(outputs[a], outputs[b])]
            comparisons.append({"a": a, "b": b, "per_input": per, "max": max(per)})

    data = {
        "tool": {"name": "openprep", "version": __version__},
        "scenario": cfg.name,
        "description": cfg.description,
        "seed": cfg.seed,
        "tolerances": dict(cfg.tolerances),
        "config": cfg.raw,
        "initial_state": {
            "spec": cfg.raw.get("initial_state") if isinstance(cfg.raw.get("initial_state"), str) else "custom",
            "dim_s": state.dim_s,
            "dim_e": state.dim_e,
            "correlation_norm": _num(correlation_norm(state)),
            "joint": matrix_literal(state.matrix),
        },
        "dynamics": {
            "label": cfg.dynamics_label,
            "factorized": is_factorized(cfg.dynamics, state.dim_s, state.dim_e),
        },
        "inputs": list(cfg.input_names),
        "observables": [o.name for o in cfg.observables],
        "procedures": procs,
        "comparisons": comparisons,
    }
    return ScenarioReport(data)


def _builtin_dir():
    return resources.files(SCENARIO_PACKAGE)


def builtin_path(name: str) -> Path:
    p = _builtin_dir() / f"{name}.yaml"
    if not p.is_file():
        raise ConfigError([f"scenario: unknown built-in scenario {name!r}"])
    return Path(str(p))


def list_scenarios() -> list[tuple[str, str]]:
    out = []
    for p in sorted(_builtin_dir().iterdir(), key=lambda p: p.name):
        if p.name.endswith(".yaml"):
            doc = yaml.safe_load(p.read_text())
            out.append((p.name[: -len(".yaml")], doc.get("description", "")))
    return out


def run_builtin(name: str, seed: int | None = None, tolerance_overrides: dict | None = None) -> ScenarioReport:
    return run_scenario(load_config(builtin_path(name), seed, tolerance_overrides))
