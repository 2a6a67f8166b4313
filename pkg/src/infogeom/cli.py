"""Batch command line front end.

Every invocation writes one JSON result document::

    {"command": ..., "inputs": {...}, "result": {...}, "warnings": [...]}

plus ``"error": {"code", "message"}`` on failure.  Exit status is 0 on
success, 1 for a domain error and 2 for usage, parse or I/O errors.
Geodesic and transport samples can instead be written as CSV.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InfoGeomError, IoError, IterLimit, ParseError, UsageError
from .expfam import ExponentialFamily, ProbVector, ceva_line
from .frobenius import (
    PreFrobeniusData,
    monge_ampere_density,
    potentiality_residual,
    semisimple_idempotents,
    structure_connection_residuals,
    wdvv_residual,
)
from .geometry import (
    ConnectionField,
    alpha_connection,
    amari_chentsov,
    curvature,
    fisher_metric,
    geodesic,
    logistic_flow,
    parallel_transport,
)
from .learning import fit_ahs, gws_correlator, kl_divergence, kl_objective, trace_split_diagnostics

COMMANDS = (
    "metric",
    "tensor3",
    "connection",
    "curvature",
    "geodesic",
    "transport",
    "wdvv",
    "frobenius",
    "ceva",
    "kl",
    "fit",
    "correlator",
    "monge-ampere",
    "split-diag",
)
CSV_COMMANDS = ("geodesic", "transport")
USAGE_CODES = (UsageError, ParseError, IoError)


# -- model files -------------------------------------------------------------------


def _read_model_text(path: str) -> str:
    p = Path(path)
    if p.is_file():
        try:
            return p.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise IoError(f"cannot read model file {path}: {exc}") from None
    bundled = resources.files("infogeom") / "data" / p.name
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise IoError(f"model file not found: {path}")


def parse_model(path: str, sign: str | None = None) -> ExponentialFamily:
    """Load a family from a JSON model file.

    Schema: ``{"omega": [str], "stats": [[float]], "base_weights": [float]?,
    "sign_convention": "plus" | "minus"?}``.  Under the ``minus`` convention
    the stored statistics are negated, so that ``theta`` multiplies ``-X``.
    A path that does not exist is looked up among the bundled models.
    ``sign`` overrides the file's convention.
    """
    text = _read_model_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("model must be a JSON object")
    unknown = set(doc) - {"omega", "stats", "base_weights", "sign_convention"}
    if unknown:
        raise ParseError(f"unknown model keys: {sorted(unknown)}")
    for key in ("omega", "stats"):
        if key not in doc:
            raise ParseError(f"model lacks required key {key!r}")
    omega = doc["omega"]
    if not isinstance(omega, list) or not all(isinstance(s, str) for s in omega):
        raise ParseError("omega must be a list of strings")
    stats = _number_matrix(doc["stats"], "stats")
    weights = doc.get("base_weights")
    if weights is not None:
        weights = _number_list(weights, "base_weights")
    convention = sign or doc.get("sign_convention", "plus")
    if convention not in ("plus", "minus"):
        raise ParseError(f"sign_convention must be 'plus' or 'minus', got {convention!r}")
    X = np.array(stats, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(omega):
        raise ParseError(f"stats must be a {len(omega)} x n matrix")
    if weights is not None and len(weights) != len(omega):
        raise ParseError("base_weights must have one entry per outcome")
    if convention == "minus":
        X = -X
    return ExponentialFamily.from_stats(X, omega, weights)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number_list(v, name):
    if not isinstance(v, list) or not all(_is_number(e) for e in v):
        raise ParseError(f"{name} must be a list of numbers")
    return v


def _number_matrix(v, name):
    if not isinstance(v, list) or not v:
        raise ParseError(f"{name} must be a non-empty list of rows")
    rows = [_number_list(r, name) for r in v]
    if len({len(r) for r in rows}) != 1:
        raise ParseError(f"{name} rows must have equal length")
    return rows


# -- flags ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="infogeom", description="Information geometry of finite exponential families.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--model", help="JSON model file (bundled names such as bernoulli.json also work)")
    ap.add_argument("--theta", type=_floats, help="natural parameters a,b,...")
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--velocity", type=_floats, help="initial geodesic velocity")
    ap.add_argument("--vector", type=_floats, help="vector to parallel transport")
    ap.add_argument("--target", type=_floats, help="target distribution for kl/fit")
    ap.add_argument("--p", type=_floats, help="first distribution for kl")
    ap.add_argument("--q", type=_floats, help="second distribution for kl; opposite-face point for ceva")
    ap.add_argument("--m", type=int, help="number of outcomes for ceva")
    ap.add_argument("--t", type=float, help="Ceva line parameter")
    ap.add_argument("--vertex", type=int, default=0, help="Ceva vertex index")
    ap.add_argument("--order", type=int, help="correlator order 1..4")
    ap.add_argument("--step", type=float, default=1.0, help="initial fit step size")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--max-iter", type=int, default=5000)
    ap.add_argument("--out", help="write the document here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--sign", choices=("plus", "minus"))
    return ap


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command} requires " + ", ".join("--" + n for n in missing))


def _family(args) -> ExponentialFamily:
    _require(args, "model")
    return parse_model(args.model, args.sign)


def _theta(args, fam) -> np.ndarray:
    if args.theta is None:
        return np.zeros(fam.n)
    return fam._theta(args.theta)


def _vec(values, n, name) -> np.ndarray:
    if len(values) != n:
        raise UsageError(f"--{name} needs {n} components, got {len(values)}")
    return np.asarray(values, dtype=float)


# -- commands ------------------------------------------------------------------------


def _cmd_metric(args, warnings):
    fam = _family(args)
    return {"g": np.asarray(fisher_metric(fam, _theta(args, fam)))}


def _cmd_tensor3(args, warnings):
    fam = _family(args)
    return {"T": np.asarray(amari_chentsov(fam, _theta(args, fam)))}


def _cmd_connection(args, warnings):
    fam = _family(args)
    theta = _theta(args, fam)
    conn = ConnectionField.from_alpha(fam, args.alpha)
    return {"gamma": conn(theta), "gamma_lower": alpha_connection(fam, theta, args.alpha)}


def _cmd_curvature(args, warnings):
    fam = _family(args)
    R = curvature(ConnectionField.from_alpha(fam, args.alpha), _theta(args, fam))
    return {"R": R.mixed, "R_lower": R.lower, "residual": float(np.max(np.abs(R.mixed), initial=0.0))}


def _geodesic_path(args, fam):
    _require(args, "velocity")
    conn = ConnectionField.from_alpha(fam, args.alpha)
    path = geodesic(conn, _theta(args, fam), _vec(args.velocity, fam.n, "velocity"), args.t_end, args.steps)
    return conn, path


def _cmd_geodesic(args, warnings):
    fam = _family(args)
    _, path = _geodesic_path(args, fam)
    return {"t": path.times, "x": path.points, "v": path.velocities}


def _cmd_transport(args, warnings):
    fam = _family(args)
    _require(args, "vector")
    conn, path = _geodesic_path(args, fam)
    w = parallel_transport(conn, path, _vec(args.vector, fam.n, "vector"))
    return {"t": path.times, "x": path.points, "v": w}


def _cmd_wdvv(args, warnings):
    fam = _family(args)
    theta = _theta(args, fam)
    return {"residual": wdvv_residual(PreFrobeniusData.statistical(fam, theta), theta)}


def _cmd_frobenius(args, warnings):
    fam = _family(args)
    theta = _theta(args, fam)
    data = PreFrobeniusData.statistical(fam, theta)
    r1, r2 = structure_connection_residuals(data, theta)
    out = {
        "potentiality_residual": potentiality_residual(data, theta),
        "wdvv_residual": wdvv_residual(data, theta),
        "R1": r1,
        "R2": r2,
        "residual": max(r1, r2),
        "idempotents": None,
    }
    try:
        out["idempotents"] = np.array(semisimple_idempotents(data, theta))
    except InfoGeomError as exc:
        warnings.append(f"{exc.code}: {exc}")
    return out


def _cmd_ceva(args, warnings):
    _require(args, "t")
    if args.q is not None:
        q = np.asarray(args.q, dtype=float)
    else:
        m = 2 if args.m is None else args.m
        if m < 2:
            raise UsageError("--m must be at least 2")
        if not 0 <= args.vertex < m:
            raise UsageError(f"--vertex must lie in 0..{m - 1}")
        q = np.full(m, 1.0 / (m - 1))
        q[args.vertex] = 0.0
    out = {"p": np.asarray(ceva_line(None, args.vertex, args.t, q)), "p_vertex_rk4": 0.5}
    if args.t != 0:
        out["p_vertex_rk4"] = logistic_flow(args.t, args.steps)[1][-1]
    return out


def _cmd_kl(args, warnings):
    if args.p is not None or args.q is not None:
        _require(args, "p", "q")
        p = ProbVector(args.p)
        q = ProbVector(args.q)
        return {"kl": kl_divergence(p, q)}
    fam = _family(args)
    _require(args, "target")
    return {"kl": kl_objective(fam, _theta(args, fam), args.target)}


def _fit(args, fam):
    _require(args, "target")
    theta0 = None if args.theta is None else fam._theta(args.theta)
    return fit_ahs(fam, args.target, step=args.step, tol=args.tol, max_iter=args.max_iter, theta0=theta0)


def _cmd_fit(args, warnings):
    point, trace = _fit(args, _family(args))
    last = trace.iterations[-1]
    return {
        "theta": point.theta,
        "moment_residual": last.moment_residual,
        "kl": last.kl_value,
        "iterations": len(trace) - 1,
        "converged": trace.converged,
        "step_size": trace.step_size,
    }


def _cmd_correlator(args, warnings):
    _require(args, "order")
    fam = _family(args)
    return {"order": args.order, "tensor": np.asarray(gws_correlator(fam, _theta(args, fam), args.order))}


def _cmd_monge_ampere(args, warnings):
    fam = _family(args)
    return {"density": monge_ampere_density(fam, _theta(args, fam))}


def _cmd_split_diag(args, warnings):
    fam = _family(args)
    try:
        _, trace = _fit(args, fam)
    except IterLimit as exc:
        warnings.append(f"{exc.code}: {exc}; diagnostics cover the partial trace")
        trace = exc.trace
    d = trace_split_diagnostics(trace, fam)
    return {"distances": d, "final": d[-1]}


HANDLERS = {
    "metric": _cmd_metric,
    "tensor3": _cmd_tensor3,
    "connection": _cmd_connection,
    "curvature": _cmd_curvature,
    "geodesic": _cmd_geodesic,
    "transport": _cmd_transport,
    "wdvv": _cmd_wdvv,
    "frobenius": _cmd_frobenius,
    "ceva": _cmd_ceva,
    "kl": _cmd_kl,
    "fit": _cmd_fit,
    "correlator": _cmd_correlator,
    "monge-ampere": _cmd_monge_ampere,
    "split-diag": _cmd_split_diag,
}


# -- output --------------------------------------------------------------------------


def _plain(obj):
    """Convert numpy payloads to JSON-native values (floats keep full precision)."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def to_csv(result: dict) -> str:
    t = np.asarray(result["t"])
    x = np.asarray(result["x"])
    v = np.asarray(result["v"])
    n = x.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)])
    for k in range(len(t)):
        w.writerow([repr(float(t[k]))] + [repr(float(e)) for e in x[k]] + [repr(float(e)) for e in v[k]])
    return buf.getvalue()


def dispatch(command: str, flags: list[str] | None = None) -> tuple[int, dict]:
    """Run ``command`` with command line ``flags``; returns ``(exit_code, document)``."""
    flags = list(flags or [])
    doc = {"command": command, "inputs": {}, "result": {}, "warnings": []}
    try:
        args = build_parser().parse_args([command] + flags)
        doc["inputs"] = {k: v for k, v in vars(args).items() if v is not None and k != "command"}
        if args.format == "csv" and command not in CSV_COMMANDS:
            raise UsageError(f"--format csv is only available for {', '.join(CSV_COMMANDS)}")
        with np.errstate(all="ignore"):
            doc["result"] = _plain(HANDLERS[command](args, doc["warnings"]))
        return 0, doc
    except USAGE_CODES as exc:
        doc["error"] = {"code": exc.code, "message": str(exc)}
        return 2, doc
    except InfoGeomError as exc:
        doc["error"] = {"code": exc.code, "message": str(exc)}
        return 1, doc


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0 if argv else 2
    code, doc = dispatch(argv[0], argv[1:])
    out = doc.get("inputs", {}).get("out")
    if code == 0 and doc["inputs"].get("format") == "csv":
        text = to_csv(doc["result"])
    else:
        text = json.dumps(doc, allow_nan=False) + "\n"
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            err = {"command": doc["command"], "inputs": doc["inputs"], "result": {}, "warnings": doc["warnings"],
                   "error": {"code": IoError.code, "message": f"cannot write {out}: {exc}"}}
            sys.stdout.write(json.dumps(err) + "\n")
            return 2
    else:
        sys.stdout.write(text)
    return code
