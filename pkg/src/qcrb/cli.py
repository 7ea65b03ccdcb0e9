"""Command-line front end.

Every subcommand builds a :class:`JobSpec`, runs it and writes a JSON envelope
(job echo, input hash, payload, diagnostics, wall-clock) to ``--out``; tabular
results also go to a CSV sibling with the same stem, and ``--figure`` renders a
PNG/PDF/SVG figure.

Exit codes: 0 success, 2 invalid input, 3 numerical or solver failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import plotting
from .core import Povm, random_povm
from .errors import DimensionError, DomainError, QcrbError, ValidationError
from .fisher import fisher_info, helstrom_info
from .gaussian import GaussianShift, LinearMeasurement, SymplecticForm, multimode_minimax, single_mode_minimax
from .holevo import HolevoSolution, dual_from_primal, holevo_bound, verify_dual_bound
from .models import affine_from_dict, model_from_name
from .qlan import clt_empirical_check
from .simulate import (Estimator, EstimatorKind, MeasurementScheme, covariant_info_check,
                       informationally_complete_povm, risk_experiment, two_step_scheme)
from .vantrees import (asymptotic_bound, ball_bump_prior, box_cos2_prior, fidelity_loss, optimal_c_field,
                       quadratic_loss, uniform_ball_prior, van_trees_rhs)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3
COMMANDS = ("bound", "dual-check", "van-trees", "gaussian-minimax", "qlan-clt", "risk-sim", "covariant-check")
REQUIRED = {
    "bound": ("theta",),
    "dual-check": ("theta",),
    "van-trees": ("prior",),
    "gaussian-minimax": ("V", "G"),
    "qlan-clt": ("mu", "N", "reps"),
    "risk-sim": ("N", "reps"),
    "covariant-check": ("d", "n_bases"),
}
NEEDS_MODEL = {"bound", "dual-check", "van-trees", "risk-sim"}
INVALID_ERRORS = (ValidationError, DimensionError, DomainError)


# ---------------------------------------------------------------- job spec

@dataclass
class JobSpec:
    command: str
    model: object = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_path: Optional[str] = None

    def validate(self) -> "JobSpec":
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        missing = [k for k in REQUIRED[self.command] if self.params.get(k) in (None, "")]
        if missing:
            raise ValidationError(f"{self.command}: missing parameters {missing}")
        if self.command in NEEDS_MODEL:
            if self.model in (None, ""):
                raise ValidationError(f"{self.command} needs --model")
            resolve_model(self.model)
        if int(self.seed) < 0:
            raise ValidationError("seed must be an unsigned integer")
        return self

    def to_dict(self) -> dict:
        return {"command": self.command, "model": self.model, "params": dict(self.params),
                "seed": int(self.seed), "output_path": self.output_path}

    @classmethod
    def from_dict(cls, data: dict) -> "JobSpec":
        try:
            return cls(data["command"], data.get("model"), dict(data.get("params", {})),
                       int(data.get("seed", 0)), data.get("output_path"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed job spec: {exc}") from exc


def input_hash(spec: JobSpec) -> str:
    """git-style blob SHA-1 of the canonical JSON job (output path excluded)."""
    job = spec.to_dict()
    job.pop("output_path")
    body = json.dumps(job, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


# ---------------------------------------------------------------- parsing helpers

def resolve_model(ref):
    if isinstance(ref, dict):
        return affine_from_dict(ref)
    ref = str(ref)
    if ref.endswith(".json") or os.path.isfile(ref):
        try:
            return affine_from_dict(json.loads(Path(ref).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ValidationError(f"cannot read model file {ref!r}: {exc}") from exc
    return model_from_name(ref)


def parse_vector(text) -> np.ndarray:
    if isinstance(text, (list, tuple, np.ndarray)):
        return np.asarray(text, dtype=float)
    try:
        return np.array([float(x) for x in str(text).split(",") if x.strip()], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"cannot parse vector {text!r}") from exc


_SCALED_I = re.compile(r"^([-+0-9.eE]*)\*?I(\d*)$")


def parse_matrix(text, dim: Optional[int] = None) -> np.ndarray:
    """``I``, ``0.5I``, ``diag(a,b,..)``, an inline JSON array or a JSON file."""
    if isinstance(text, (list, np.ndarray)):
        return np.atleast_2d(np.asarray(text, dtype=float))
    s = str(text).strip().replace(" ", "")
    m = _SCALED_I.match(s)
    if m:
        n = int(m.group(2)) if m.group(2) else dim
        if n is None:
            raise ValidationError(f"cannot infer the size of {text!r}")
        return (float(m.group(1)) if m.group(1) not in ("", "+") else 1.0) * np.eye(n)
    if s.startswith("diag(") and s.endswith(")"):
        return np.diag(parse_vector(s[5:-1]))
    try:
        if s.startswith("["):
            return np.atleast_2d(np.asarray(json.loads(s), dtype=float))
        return np.atleast_2d(np.asarray(json.loads(Path(s).read_text()), dtype=float))
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot parse matrix {text!r}") from exc


def parse_loss(text, model):
    text = "fidelity" if text in (None, "") else str(text)
    if text == "fidelity":
        return fidelity_loss(model)
    if text == "quadratic":
        return quadratic_loss(np.eye(model.param_dim))
    if text.startswith("quadratic:"):
        return quadratic_loss(parse_matrix(text.split(":", 1)[1], model.param_dim))
    raise ValidationError(f"unknown loss {text!r}")


_PRIOR = re.compile(r"^(?P<kind>cos2|bump|uniform)\((?P<args>[^)]*)\)$")


def parse_prior(text, dim: int):
    """``cos2(a,b)`` box [a,b]^p, ``bump(r)`` ball bump, ``uniform(r)`` or a JSON file."""
    if isinstance(text, dict):
        data = text
    else:
        s = str(text).replace(" ", "")
        m = _PRIOR.match(s)
        if m:
            args = parse_vector(m.group("args"))
            if m.group("kind") == "cos2":
                if args.size != 2:
                    raise ValidationError("cos2(a,b) takes two numbers")
                return box_cos2_prior([args[0]] * dim, [args[1]] * dim)
            if args.size != 1:
                raise ValidationError(f"{m.group('kind')}(r) takes one number")
            fn = ball_bump_prior if m.group("kind") == "bump" else uniform_ball_prior
            return fn(float(args[0]), dim)
        try:
            data = json.loads(Path(s).read_text())
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot parse prior {text!r}") from exc
    kind = data.get("kind")
    if kind == "cos2":
        return box_cos2_prior(data["lower"], data["upper"])
    if kind == "bump":
        return ball_bump_prior(float(data["radius"]), int(data.get("dim", dim)), data.get("center"))
    if kind == "uniform":
        return uniform_ball_prior(float(data["radius"]), int(data.get("dim", dim)))
    raise ValidationError(f"unknown prior kind {kind!r}")


def parse_scheme(text, model, loss):
    text = "random_basis" if text in (None, "") else str(text)
    d = model.dim
    if text == "random_basis":
        return MeasurementScheme.random_basis()
    if text == "fixed:z":
        return MeasurementScheme.per_copy_fixed(Povm.from_basis(np.eye(d)), "computational basis")
    if text == "fixed:ic":
        return MeasurementScheme.per_copy_fixed(informationally_complete_povm(d), "informationally complete")
    if text.startswith("fixed:"):
        try:
            data = json.loads(Path(text[6:]).read_text())
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read POVM file {text[6:]!r}") from exc
        return MeasurementScheme.per_copy_fixed(Povm.from_dict(data))
    if text.startswith("two_step:"):
        return two_step_scheme(model, loss, float(text.split(":", 1)[1]))
    raise ValidationError(f"unknown scheme {text!r}")


# ---------------------------------------------------------------- handlers

def _bound(spec: JobSpec, model):
    theta = model.check(parse_vector(spec.params["theta"]))
    loss = parse_loss(spec.params.get("loss"), model)
    g = loss.g0(theta)
    sol = holevo_bound(model, theta, g)
    try:
        helstrom = float(np.trace(g @ np.linalg.inv(helstrom_info(model, theta).matrix)))
    except Exception:
        helstrom = None
    payload = sol.to_dict()
    payload.update({"model": model.name, "theta": theta.tolist(), "helstrom_bound": helstrom})
    row = {"model": model.name, "theta": ",".join(repr(float(t)) for t in theta), "value": sol.value,
           "helstrom_bound": helstrom, "dual_value": sol.dual_value}
    return payload, sol.convergence, [row]


def _dual_check(spec: JobSpec, model):
    theta = model.check(parse_vector(spec.params["theta"]))
    loss = parse_loss(spec.params.get("loss"), model)
    sol = holevo_bound(model, theta, loss.g0(theta))
    k0, c_k = dual_from_primal(sol)
    rng = np.random.default_rng(spec.seed)
    n = int(spec.params.get("n_povms", 500))
    outcomes = int(spec.params.get("outcomes", 4))
    povms = [random_povm(model.dim, outcomes, rng) for _ in range(n)]
    report = verify_dual_bound(model, theta, k0, c_k, povms)
    payload = dict(report)
    payload.update({"c_k": c_k, "k0": k0.matrix.tolist(), "model": model.name, "theta": theta.tolist()})
    rows = [{"povm": i, "trace_k_info": v, "c_k": c_k} for i, v in enumerate(report["values"])]
    return payload, {"violations": report["violations"]}, rows


def _van_trees(spec: JobSpec, model):
    prior = parse_prior(spec.params["prior"], model.param_dim)
    loss = parse_loss(spec.params.get("loss"), model)
    res = asymptotic_bound(model, prior, loss)
    payload = {"model": model.name, "prior": prior.name, "asymptotic_bound": res.value,
               "quadrature_error": res.error, "n_nodes": res.n_nodes}
    n = spec.params.get("N")
    if n not in (None, ""):
        povm_ref = spec.params.get("povm")
        if povm_ref in (None, "", "helstrom"):
            def info_field(th):
                return helstrom_info(model, th)
        else:
            povm = parse_scheme(f"fixed:{povm_ref}", model, loss).povm

            def info_field(th):
                return fisher_info(model, th, povm)
        vt = van_trees_rhs(model, prior, loss, optimal_c_field(model, loss), int(n), info_field)
        payload["van_trees"] = vt.to_dict()
    return payload, {"quadrature_level": res.error}, res.rows()


def _gaussian(spec: JobSpec, model):
    p = int(spec.params.get("modes", 1))
    l_cl = int(spec.params.get("classical", 0))
    sym = SymplecticForm(p, l_cl)
    v = parse_matrix(spec.params["V"], sym.dim)
    l_mat = parse_matrix(spec.params.get("L") or "I", sym.dim)
    shift = GaussianShift(v, l_mat, sym)
    g = parse_matrix(spec.params["G"], shift.k)
    res = multimode_minimax(shift, g)
    meas = res["measurement"]
    payload = {"risk": res["risk"], "shift": shift.to_dict(), "measurement": meas.to_dict(),
               "output_covariance": meas.output_covariance(shift).tolist()}
    if p == 1 and l_cl == 0 and np.allclose(l_mat, np.eye(2)):
        closed = single_mode_minimax(g, v)
        payload["closed_form"] = {"risk": closed["risk"], "Y0": closed["Y0"].tolist()}
    return payload, res["diagnostics"], [{"risk": res["risk"]}]


def _qlan(spec: JobSpec, model):
    mu = parse_vector(spec.params["mu"])
    h = parse_vector(spec.params.get("h") or ",".join(["0"] * (mu.size**2 - 1)))
    obs = spec.params.get("observables")
    obs = None if obs in (None, "") else [o.strip() for o in str(obs).split(",")]
    report = clt_empirical_check(np.diag(mu), h, int(spec.params["N"]), int(spec.params["reps"]),
                                 spec.seed, observables=obs)
    rows = report.to_rows()
    return {"rows": rows, "N": report.n, "reps": report.reps}, {}, rows


def _risk(spec: JobSpec, model):
    loss = parse_loss(spec.params.get("loss"), model)
    loss_arg = "fidelity" if spec.params.get("loss") in (None, "", "fidelity") else loss
    if spec.params.get("prior") not in (None, ""):
        target = parse_prior(spec.params["prior"], model.param_dim)
    elif spec.params.get("theta") not in (None, ""):
        target = model.check(parse_vector(spec.params["theta"]))
    else:
        raise ValidationError("risk-sim needs --theta or --prior")
    scheme = parse_scheme(spec.params.get("scheme"), model, loss)
    est = spec.params.get("estimator", "mle")
    if est == "mle":
        estimator = Estimator()
    elif est == "bayes":
        if not spec.params.get("prior"):
            raise ValidationError("the bayes estimator needs --prior")
        estimator = Estimator(EstimatorKind.BAYES_MEAN, target)
    else:
        raise ValidationError(f"unknown estimator {est!r}")
    report = risk_experiment(model, target, scheme, estimator, loss_arg, int(spec.params["N"]),
                             int(spec.params["reps"]), spec.seed)
    payload = report.to_dict()
    row = {k: v for k, v in payload.items() if k != "diagnostics"}
    return payload, report.diagnostics, [row]


def _covariant(spec: JobSpec, model):
    res = covariant_info_check(int(spec.params["d"]), int(spec.params["n_bases"]), spec.seed)
    payload = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in res.items()}
    row = {k: payload[k] for k in ("d", "n_bases", "trace_hinv_info", "trace_hinv_info_se", "max_entry_deviation")}
    return payload, {}, [row]


HANDLERS = {
    "bound": _bound,
    "dual-check": _dual_check,
    "van-trees": _van_trees,
    "gaussian-minimax": _gaussian,
    "qlan-clt": _qlan,
    "risk-sim": _risk,
    "covariant-check": _covariant,
}


def render_figure(command: str, payload: dict, rows: list, path):
    if command == "bound":
        return plotting.bound_figure(payload, path)
    if command == "dual-check":
        return plotting.dual_figure(payload, path)
    if command == "van-trees":
        return plotting.van_trees_figure(rows, path)
    if command == "gaussian-minimax":
        return plotting.covariance_figure(np.array(payload["output_covariance"]), path,
                                          np.array(payload["shift"]["covariance"]))
    if command == "qlan-clt":
        return plotting.clt_figure(rows, path)
    if command == "risk-sim":
        return plotting.risk_figure(payload, path)
    if command == "covariant-check":
        return plotting.matrix_figure(np.array(payload["ratio"]), path, "I_M H^-1")
    raise ValidationError(f"no figure for {command}")


# ---------------------------------------------------------------- output

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_cell(x) for x in np.ravel(v))
    return str(v)


def csv_text(rows: list, columns: Optional[list] = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


@dataclass
class ResultEnvelope:
    job: dict
    input_hash: str
    payload: dict
    diagnostics: dict
    wall_clock_s: float
    rows: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return _jsonable({"job": self.job, "input_hash": self.input_hash, "payload": self.payload,
                          "diagnostics": self.diagnostics, "wall_clock_s": self.wall_clock_s})


def run_job(spec: JobSpec) -> ResultEnvelope:
    spec.validate()
    model = resolve_model(spec.model) if spec.command in NEEDS_MODEL else None
    start = time.perf_counter()
    payload, diagnostics, rows = HANDLERS[spec.command](spec, model)
    return ResultEnvelope(spec.to_dict(), input_hash(spec), payload, diagnostics,
                          time.perf_counter() - start, rows)


def write_outputs(env: ResultEnvelope, out: Optional[str], figure: Optional[str] = None, stream=None):
    text = json.dumps(env.to_dict(), indent=2, sort_keys=True)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        if env.rows:
            path.with_suffix(".csv").write_text(csv_text(env.rows), newline="")
    else:
        (stream or sys.stdout).write(text + "\n")
    if figure:
        Path(figure).parent.mkdir(parents=True, exist_ok=True)
        render_figure(env.job["command"], env.payload, env.rows, figure)


def load_envelope(path) -> dict:
    """Read an envelope and re-validate its payload with the producing module."""
    data = json.loads(Path(path).read_text())
    command, payload = data["job"]["command"], data["payload"]
    if command == "bound":
        HolevoSolution.from_dict(payload)
    elif command == "gaussian-minimax":
        shift = GaussianShift.from_dict(payload["shift"])
        LinearMeasurement.from_dict(payload["measurement"]).check(shift)
    elif command == "risk-sim":
        bound, risk, se = payload["bound"], payload["empirical_risk"], payload["std_error"]
        expected = bound is not None and risk < bound - 3 * se
        if risk < 0 or se < 0 or bool(payload["violation"]) != expected:
            raise ValidationError("risk report fails its invariants")
    elif command == "dual-check":
        if payload["violations"] != sum(v > payload["c_k"] + 1e-6 for v in payload["values"]):
            raise ValidationError("dual-check report is inconsistent")
    return data


# ---------------------------------------------------------------- sweep

SUMMARY = {
    "bound": ("value", "helstrom_bound", "dual_value"),
    "dual-check": ("max_value", "c_k", "violations"),
    "van-trees": ("asymptotic_bound", "quadrature_error"),
    "gaussian-minimax": ("risk",),
    "qlan-clt": (),
    "risk-sim": ("empirical_risk", "std_error", "bound", "violation"),
    "covariant-check": ("trace_hinv_info", "max_entry_deviation"),
}


def _with_axis(spec: JobSpec, axis: str, value: float) -> JobSpec:
    params = dict(spec.params)
    if axis == "r":
        theta = parse_vector(params.get("theta") or "0,0,1")
        norm = np.linalg.norm(theta)
        direction = theta / norm if norm > 0 else np.eye(theta.size)[-1]
        params["theta"] = ",".join(repr(float(x)) for x in value * direction)
    elif re.fullmatch(r"theta\[\d+\]", axis):
        theta = parse_vector(params["theta"])
        theta[int(axis[6:-1])] = value
        params["theta"] = ",".join(repr(float(x)) for x in theta)
    elif axis == "seed":
        return JobSpec(spec.command, spec.model, params, int(value), spec.output_path)
    else:
        params[axis] = int(value) if axis in ("N", "reps", "n_bases", "n_povms", "d") else value
    return JobSpec(spec.command, spec.model, params, spec.seed, spec.output_path)


def sweep(spec: JobSpec, axis: str, values: list, threads: Optional[int] = None) -> list:
    """One row per value in input order; failures land in the ``error`` column."""
    if spec.command == "qlan-clt":
        raise ValidationError("qlan-clt has no scalar summary to sweep")
    cols = SUMMARY[spec.command]
    threads = threads or int(os.environ.get("QCRB_THREADS", "1") or 1)

    def one(value):
        row = {axis: value}
        try:
            env = run_job(_with_axis(spec, axis, value))
            row.update({c: env.payload.get(c) for c in cols})
            row["error"] = ""
        except Exception as exc:  # per-row failures are recorded, not raised
            row.update({c: None for c in cols})
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


# ---------------------------------------------------------------- argparse

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--model", help="full_bloch | equatorial | bloch_line | pure_state(d) | diagonal(mu..) | model.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON envelope path; tabular output goes to the .csv sibling")
    p.add_argument("--figure", help="render a figure to this path (png, pdf, svg)")


def _command_parsers(sub):
    p = sub.add_parser("bound", help="Holevo bound at a parameter point")
    p.add_argument("--theta", required=True)
    p.add_argument("--loss", default="fidelity", help="fidelity | quadratic | quadratic:<matrix>")

    p = sub.add_parser("dual-check", help="dual information bound on random POVMs")
    p.add_argument("--theta", required=True)
    p.add_argument("--loss", default="fidelity")
    p.add_argument("--n-povms", dest="n_povms", type=int, default=500)
    p.add_argument("--outcomes", type=int, default=4)

    p = sub.add_parser("van-trees", help="asymptotic Bayesian bound and the van Trees right-hand side")
    p.add_argument("--prior", required=True, help="cos2(a,b) | bump(r) | uniform(r) | prior.json")
    p.add_argument("--loss", default="fidelity")
    p.add_argument("--N", type=int)
    p.add_argument("--povm", help="'helstrom' or a POVM JSON file for the information field")

    p = sub.add_parser("gaussian-minimax", help="minimax risk of a Gaussian shift model")
    p.add_argument("--modes", type=int, default=1)
    p.add_argument("--classical", type=int, default=0)
    p.add_argument("--V", required=True, help="I, 0.5I, diag(..), JSON array or file")
    p.add_argument("--G", required=True)
    p.add_argument("--L", default="I")

    p = sub.add_parser("qlan-clt", help="Monte Carlo check of the quantum CLT")
    p.add_argument("--mu", required=True)
    p.add_argument("--h")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--observables")

    p = sub.add_parser("risk-sim", help="empirical N x risk of a measurement and estimator")
    p.add_argument("--theta")
    p.add_argument("--prior")
    p.add_argument("--scheme", default="random_basis", help="random_basis | fixed:z | fixed:ic | fixed:<povm.json> | two_step:<fraction>")
    p.add_argument("--estimator", default="mle", choices=["mle", "bayes"])
    p.add_argument("--loss", default="fidelity")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)

    p = sub.add_parser("covariant-check", help="random-basis average information against the Helstrom matrix")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-bases", dest="n_bases", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcrb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _command_parsers(sub)
    for name in COMMANDS:
        _add_common(sub.choices[name])
    p = sub.add_parser("run", help="run a JobSpec JSON file")
    p.add_argument("job")
    p.add_argument("--out")
    p.add_argument("--figure")
    p = sub.add_parser("sweep", help="repeat a command over values of one parameter",
                       epilog="Arguments after the target command are that command's flags.")
    p.add_argument("target", nargs="?", choices=COMMANDS)
    p.add_argument("--job", help="JobSpec JSON file instead of a target command")
    p.add_argument("--axis", required=True, help="parameter name, 'r' (|theta|), 'theta[i]' or 'seed'")
    p.add_argument("--values", required=True, help="comma-separated values (may be empty)")
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--figure")
    return parser


_NON_PARAMS = {"command", "model", "seed", "out", "figure"}


def spec_from_args(args: argparse.Namespace) -> JobSpec:
    params = {k: v for k, v in vars(args).items() if k not in _NON_PARAMS and v is not None}
    return JobSpec(args.command, getattr(args, "model", None), params, args.seed, getattr(args, "out", None))


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "sweep":
            if args.job:
                spec = JobSpec.from_dict(json.loads(Path(args.job).read_text()))
            elif args.target:
                sub = build_parser()
                targ, rest = sub.parse_known_args([args.target] + extra)
                if rest:
                    raise ValidationError(f"unrecognized arguments: {' '.join(rest)}")
                spec = spec_from_args(targ)
            else:
                raise ValidationError("sweep needs a target command or --job")
            values = [float(v) for v in args.values.split(",") if v.strip()]
            rows = sweep(spec, args.axis, values, args.threads)
            cols = [args.axis] + list(SUMMARY.get(spec.command, ())) + ["error"]
            text = csv_text(rows, cols)
            if args.out:
                Path(args.out).parent.mkdir(parents=True, exist_ok=True)
                Path(args.out).write_text(text, newline="")
            else:
                sys.stdout.write(text)
            if args.figure:
                numeric = [c for c in SUMMARY[spec.command] if c not in ("violations", "violation")]
                plotting.sweep_figure(rows, args.axis, numeric, args.figure)
            return EXIT_OK
        if extra:
            raise ValidationError(f"unrecognized arguments: {' '.join(extra)}")
        if args.command == "run":
            try:
                spec = JobSpec.from_dict(json.loads(Path(args.job).read_text()))
            except (OSError, ValueError) as exc:
                raise ValidationError(f"cannot read job file: {exc}") from exc
            out = args.out or spec.output_path
        else:
            spec = spec_from_args(args)
            out = args.out
        env = run_job(spec)
        write_outputs(env, out, args.figure)
        return EXIT_OK
    except INVALID_ERRORS as exc:
        sys.stderr.write(f"qcrb: invalid input: {exc}\n")
        return EXIT_INVALID
    except QcrbError as exc:
        diag = getattr(exc, "diagnostics", None)
        sys.stderr.write(f"qcrb: {type(exc).__name__}: {exc}\n")
        if diag:
            sys.stderr.write(json.dumps(_jsonable(diag), indent=2) + "\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
