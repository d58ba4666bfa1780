"""Command-line front end.

Subcommands wrap the library: ``measure`` evaluates imaginarity and the
bipartite monotones, ``convert`` answers conversion questions (exact or
stochastic-approximate, analytic or SDP), ``decompose`` prints optimal
pure-state decompositions, and ``kraus`` checks and rewrites Kraus sets.

Exit codes: 0 success, 2 parse failure, 3 invariant violation or
incompatible inputs, 4 solver failure. ``IMKIT_SOLVER_GAP`` overrides the
SDP gap tolerance.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .decompositions import (
    conjugate_orthogonal_decomposition,
    equal_imaginarity_decomposition,
)
from .fileio import ParseError, dumps as dump_matrix_file, loads as parse_matrix_file
from .measures import (
    geometric_imaginarity,
    geometric_imaginarity_pure,
    real_entanglement_infidelity,
    real_entanglement_monotone,
)
from .sdp import (
    DEFAULT_SOLVER,
    SolverConfig,
    SolverStatus,
    feasibility_alpha,
    optimal_fidelity_pure_target,
)
from .states import (
    BipartiteState,
    DensityMatrix,
    InvariantError,
    PureState,
    SolverError,
    Tolerances,
    as_density,
)
from .transforms import (
    KrausSet,
    approx_fidelity,
    approx_prob,
    covariance_residual,
    is_covariant,
    merge_cp_maps,
    prob_exact,
    realify_covariant,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_SOLVER = 4

CURVE_DEFAULT = 50

ANALYTIC_MODES = ("exact", "prob-at-fidelity", "fidelity-at-prob")


@dataclass
class Report:
    """Machine-readable record of one command invocation."""

    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def check_finite(self):
        def walk(x, where):
            if isinstance(x, bool) or isinstance(x, str) or x is None:
                return
            if isinstance(x, (int, float, complex)):
                if not np.all(np.isfinite([np.real(x), np.imag(x)])):
                    raise InvariantError(f"non-finite value in report at {where}")
                return
            if isinstance(x, dict):
                for k, v in x.items():
                    walk(v, f"{where}.{k}")
                return
            if isinstance(x, (list, tuple)):
                for i, v in enumerate(x):
                    walk(v, f"{where}[{i}]")
        walk(self.outputs, "outputs")
        walk(self.curves, "curves")

    def to_json(self) -> str:
        doc = {"command": self.command, "inputs": self.inputs,
               "outputs": self.outputs, "curves": self.curves,
               "notes": self.notes, "provenance": self.provenance}
        return json.dumps(doc, indent=1)

    def to_text(self) -> str:
        buf = io.StringIO()
        print(f"imkit {self.command}", file=buf)
        for name, meta in self.inputs.items():
            print(f"  input {name}: {meta}", file=buf)
        for key, val in self.outputs.items():
            if isinstance(val, float):
                print(f"  {key} = {val:.12g}", file=buf)
            elif isinstance(val, (bool, int, str)):
                print(f"  {key} = {val}", file=buf)
            else:
                print(f"  {key} = {json.dumps(val)}", file=buf)
        for name, curve in self.curves.items():
            print(f"  curve {name}: {', '.join(curve['columns'])}", file=buf)
            for row in curve["rows"]:
                print("    " + "  ".join(f"{v:.9g}" for v in row), file=buf)
        for note in self.notes:
            print(f"  note: {note}", file=buf)
        return buf.getvalue()

    def to_csv(self) -> str:
        lines = []
        if self.curves:
            name, curve = next(iter(self.curves.items()))
            lines.append(",".join(curve["columns"]))
            for row in curve["rows"]:
                lines.append(",".join(f"{v:.12g}" for v in row))
        else:
            lines.append("name,value")
            for key, val in self.outputs.items():
                if isinstance(val, (int, float, bool, str)):
                    lines.append(f"{key},{val}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "structured":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


def _digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()[:12]


def _tolerances(tol: float | None) -> Tolerances:
    if tol is None:
        return Tolerances()
    return Tolerances(herm=tol, tr=tol, norm=tol, psd=10 * tol, rec=10 * tol)


def _solver_config() -> SolverConfig:
    gap = os.environ.get("IMKIT_SOLVER_GAP")
    if gap is None:
        return DEFAULT_SOLVER
    try:
        return SolverConfig(gap=float(gap))
    except ValueError as exc:
        raise InvariantError(f"IMKIT_SOLVER_GAP must be a float, got {gap!r}") from exc


def _load_input(path: str, tol: Tolerances, report: Report, name: str):
    raw = open(path, "rb").read()
    obj = parse_matrix_file(raw.decode("utf-8"), tol=tol)
    kind = {PureState: "pure", DensityMatrix: "density",
            BipartiteState: "bipartite", KrausSet: "kraus_set"}[type(obj)]
    report.inputs[name] = f"{kind} sha256:{_digest(raw)}"
    return obj


def _pairs(matrix) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def _require(condition: bool, message: str):
    if not condition:
        raise InvariantError(message)


# ---------------------------------------------------------------- commands

def cmd_measure(args, report: Report, tol: Tolerances):
    obj = _load_input(args.state_file, tol, report, "state")
    if isinstance(obj, KrausSet):
        raise InvariantError("measure expects a state file, got a Kraus set")
    if isinstance(obj, PureState):
        report.outputs["geometric_imaginarity"] = geometric_imaginarity_pure(obj)
    else:
        report.outputs["geometric_imaginarity"] = geometric_imaginarity(as_density(obj))
    if isinstance(obj, BipartiteState):
        for side in ("A", "B"):
            report.outputs[f"trace_monotone_{side}"] = real_entanglement_monotone(obj, side=side)
            try:
                report.outputs[f"infidelity_monotone_{side}"] = \
                    real_entanglement_infidelity(obj, side=side)
            except InvariantError:
                report.notes.append(
                    f"infidelity monotone undefined on side {side}: partial transpose is NPT")


def _as_pure_source(obj, what: str) -> PureState:
    _require(isinstance(obj, PureState),
             f"{what} must be a pure state for this mode (analytic trade-off "
             "formulas hold for pure sources only)")
    return obj


def _curve_grid(n: int, open_left: bool) -> np.ndarray:
    return np.linspace(1.0 / n if open_left else 0.0, 1.0, n)


def cmd_convert(args, report: Report, tol: Tolerances):
    source = _load_input(args.source_file, tol, report, "source")
    target = _load_input(args.target_file, tol, report, "target")
    _require(not isinstance(source, KrausSet) and not isinstance(target, KrausSet),
             "convert expects state files")
    mode = args.mode
    curve_n = args.curve

    if mode == "exact":
        psi = _as_pure_source(source, "source")
        _require(curve_n is None, "exact mode has no trade-off parameter to sweep")
        report.outputs["probability"] = prob_exact(psi, as_density(target))

    elif mode == "prob-at-fidelity":
        psi = _as_pure_source(source, "source")
        _require(args.fidelity is not None, "prob-at-fidelity needs --fidelity")
        res = approx_prob(psi, as_density(target), args.fidelity)
        report.outputs.update(probability=res.probability, fidelity_goal=res.fidelity,
                              alpha=res.params.alpha, beta=res.params.beta,
                              k=res.params.k, m1=res.params.m1)
        if curve_n:
            rows = [[f, approx_prob(psi, as_density(target), f).probability]
                    for f in _curve_grid(curve_n, open_left=False)]
            report.curves["probability_vs_fidelity"] = {
                "columns": ["fidelity", "probability"], "rows": rows}

    elif mode == "fidelity-at-prob":
        psi = _as_pure_source(source, "source")
        _require(args.prob is not None, "fidelity-at-prob needs --prob")
        res = approx_fidelity(psi, as_density(target), args.prob)
        report.outputs.update(fidelity=res.fidelity, probability=res.probability)
        if curve_n:
            rows = [[p, approx_fidelity(psi, as_density(target), p).fidelity]
                    for p in _curve_grid(curve_n, open_left=True)]
            report.curves["fidelity_vs_probability"] = {
                "columns": ["probability", "fidelity"], "rows": rows}

    elif mode == "feasible":
        _require(curve_n is None, "feasible mode has no trade-off parameter to sweep")
        result = feasibility_alpha(as_density(source), as_density(target),
                                   config=_solver_config())
        if result.solver_status is SolverStatus.FAILED:
            raise SolverError("feasibility program failed; no claim made")
        report.outputs.update(alpha=result.alpha, feasible=result.feasible,
                              solver_status=result.solver_status.value)

    elif mode == "sdp-fidelity":
        _require(isinstance(target, PureState),
                 "sdp-fidelity needs a pure target state")
        _require(args.prob is not None, "sdp-fidelity needs --prob")
        config = _solver_config()

        def solve(p: float) -> float:
            sol = optimal_fidelity_pure_target(as_density(source), target, p, config=config)
            if sol.solver_status in (SolverStatus.FAILED, SolverStatus.INFEASIBLE_NUMERIC):
                raise SolverError(f"fidelity program ended with status "
                                  f"{sol.solver_status.value} at p={p:g}")
            return sol.objective

        report.outputs.update(fidelity=solve(args.prob), probability=args.prob)
        if curve_n:
            rows = [[p, solve(p)] for p in _curve_grid(curve_n, open_left=True)]
            report.curves["fidelity_vs_probability"] = {
                "columns": ["probability", "fidelity"], "rows": rows}
    else:  # pragma: no cover - argparse restricts choices
        raise InvariantError(f"unknown mode {mode!r}")


def cmd_decompose(args, report: Report, tol: Tolerances):
    obj = _load_input(args.state_file, tol, report, "state")
    _require(isinstance(obj, (DensityMatrix, PureState, BipartiteState)),
             "decompose expects a density input")
    rho = as_density(obj)
    if args.kind == "conjugate-orthogonal":
        result = conjugate_orthogonal_decomposition(rho, tol=tol)
        ensemble = result.ensemble
        report.outputs["diag"] = [float(d) for d in result.diag]
        report.outputs["diag_sum"] = float(result.diag.sum())
    else:
        ensemble = equal_imaginarity_decomposition(rho, tol=tol)
        report.outputs["target_imaginarity"] = geometric_imaginarity(rho)
    report.outputs["weights"] = [float(w) for w in ensemble.weights]
    report.outputs["members"] = [[[float(z.real), float(z.imag)] for z in s.vec]
                                 for s in ensemble.states]
    report.outputs["member_imaginarity"] = [geometric_imaginarity_pure(s)
                                            for s in ensemble.states]


def cmd_kraus(args, report: Report, tol: Tolerances):
    obj = _load_input(args.kraus_file, tol, report, "kraus")
    _require(isinstance(obj, KrausSet), "kraus expects a kraus_set file")
    action = args.action
    if action == "check-real":
        worst = max(float(np.abs(k.imag).max()) for k in obj.ops)
        report.outputs.update(is_real=obj.is_real(), max_imag=worst)
        return None
    if action == "check-covariant":
        res = covariance_residual(obj)
        report.outputs.update(covariant=is_covariant(obj), residual=res)
        return None
    if action == "realify":
        out = realify_covariant(obj)
    else:  # merge
        _require(args.second is not None, "merge needs a second kraus_set file")
        other = _load_input(args.second, tol, report, "kraus2")
        _require(isinstance(other, KrausSet), "merge expects a second kraus_set file")
        out = merge_cp_maps(obj, other)
    report.outputs["operators"] = [_pairs(k) for k in out.ops]
    report.outputs["trace_preserving"] = bool(out.trace_preserving)
    return out


# ---------------------------------------------------------------- driver

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imkit",
                                     description="imaginarity resource toolkit")
    parser.add_argument("--version", action="version", version=f"imkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="base tolerance (psd/rec scale as 10x)")
    common.add_argument("--output", default=None, help="write the result here")
    common.add_argument("--format", choices=("text", "csv", "structured"),
                        default="text")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common],
                       help="imaginarity and bipartite monotones of a state")
    p.add_argument("state_file")

    p = sub.add_parser("convert", parents=[common],
                       help="conversion probabilities and fidelities")
    p.add_argument("source_file")
    p.add_argument("target_file")
    p.add_argument("--mode", required=True,
                   choices=("exact", "prob-at-fidelity", "fidelity-at-prob",
                            "feasible", "sdp-fidelity"))
    p.add_argument("--fidelity", type=float, default=None,
                   help="fidelity goal for prob-at-fidelity")
    p.add_argument("--prob", type=float, default=None,
                   help="success probability for fidelity-at-prob / sdp-fidelity")
    p.add_argument("--curve", type=int, nargs="?", const=CURVE_DEFAULT, default=None,
                   metavar="N", help=f"emit an N-point trade-off table "
                                     f"(default {CURVE_DEFAULT})")

    p = sub.add_parser("decompose", parents=[common],
                       help="pure-state decompositions")
    p.add_argument("state_file")
    p.add_argument("--kind", required=True,
                   choices=("conjugate-orthogonal", "equal-imaginarity"))

    p = sub.add_parser("kraus", parents=[common], help="Kraus-set utilities")
    p.add_argument("kraus_file")
    p.add_argument("second", nargs="?", default=None,
                   help="second kraus_set file (merge)")
    p.add_argument("--action", required=True,
                   choices=("check-real", "check-covariant", "realify", "merge"))

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = _tolerances(args.tol)
    report = Report(command=args.command)
    report.provenance = {
        "version": __version__,
        "tolerances": {"herm": tol.herm, "tr": tol.tr, "norm": tol.norm,
                       "psd": tol.psd, "rec": tol.rec},
        "solver_gap": None,
    }

    artifact = None
    try:
        if args.command == "convert":
            report.provenance["solver_gap"] = _solver_config().gap
        if args.command == "measure":
            cmd_measure(args, report, tol)
        elif args.command == "convert":
            cmd_convert(args, report, tol)
        elif args.command == "decompose":
            cmd_decompose(args, report, tol)
        else:
            artifact = cmd_kraus(args, report, tol)
        report.check_finite()
    except ParseError as exc:
        print(f"imkit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"imkit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"imkit: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except SolverError as exc:
        print(f"imkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    if artifact is not None and args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dump_matrix_file(artifact) + "\n")
        print(f"wrote {args.output}")
        return EXIT_OK

    rendered = report.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
