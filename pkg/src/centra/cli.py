"""Command-line front end.

A problem is one JSON document::

    {
      "dimension": 2,
      "generators": [[["1", "0"], ["0", "2"]]],
      "symmetry": [["1", "0"], ["0", "-1"]],
      "field": ["x1", "2*x2 + x1^2"],
      "system": {"seeds": [["0", "x1^2"]],
                 "coefficients": [{"sigma": ["1"], "alpha": "0"}]},
      "options": {"max_degree": 6, "cap": 200}
    }

Only ``dimension`` and ``generators`` are always required. Rationals are
strings. Reports go to stdout (or ``--output``); errors go to stderr as JSON
with exit code 2 (parse or validation), 3 (resource cap) or 4 (unsupported).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .equivariance import (
    FiniteCertified,
    centralizer_up_to,
    check_directional_closure,
    finiteness_report,
    infinite_certificate,
    nilpotency_witness,
)
from .errors import CentraError, ParseError, UnsupportedInput
from .exactla import QMatrix, format_rational, parse_rational
from .invariants import invariant_space, relative_invariant_space, resonance_lattice
from .liealg import LieAlgebra, bracket_closure, diagonal_profile, is_perfect, is_solvable
from .normalform import FormalField, normal_form
from .polyalg import parse_field, parse_poly
from .superposition import (
    Coefficient,
    EDESystem,
    chen_reduce,
    close_family,
    field_residual,
    field_rhs,
    solve_elementary,
    system_residual,
    system_rhs,
    vec_from_json,
    vec_is_zero,
    vec_to_json,
    vec_value_at,
    verify_numeric,
)


# -- problem parsing ------------------------------------------------------------

def _matrix(data, n: int, what: str) -> QMatrix:
    if not isinstance(data, list) or len(data) != n or any(not isinstance(r, list) or len(r) != n for r in data):
        raise ParseError(f"{what} must be a {n}x{n} list of rows")
    return QMatrix.from_rows([[parse_rational(x) for x in row] for row in data])


def _rationals(text: str) -> list:
    parts = [p for p in text.replace(",", " ").split() if p]
    return [parse_rational(p) for p in parts]


class Problem:
    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise ParseError("problem file must hold a JSON object")
        try:
            n = doc["dimension"]
            gens = doc["generators"]
        except KeyError as exc:
            raise ParseError(f"missing key {exc.args[0]!r}") from None
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ParseError("dimension must be a positive integer")
        if not isinstance(gens, list):
            raise ParseError("generators must be a list of matrices")
        self.n = n
        self.generators = [_matrix(g, n, f"generator {i}") for i, g in enumerate(gens)]
        self.symmetry = _matrix(doc["symmetry"], n, "symmetry") if "symmetry" in doc else None
        self.field = parse_field(doc["field"], n) if "field" in doc else None
        self.system = doc.get("system")
        self.options = doc.get("options", {})
        if not isinstance(self.options, dict):
            raise ParseError("options must be an object")

    def option(self, name, cli_value, default):
        if cli_value is not None:
            return cli_value
        return self.options.get(name, default)

    def algebra(self, cap: int) -> LieAlgebra:
        return bracket_closure(self.generators, cap=cap, n=self.n)


def load_problem(path: str) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return Problem(doc)


def _matrix_json(m: QMatrix) -> list:
    return [[format_rational(x) for x in m.row(i)] for i in range(m.rows)]


def _algebra_json(m: LieAlgebra) -> dict:
    solvable, series = is_solvable(m)
    return {
        "dimension": m.dim,
        "basis": [_matrix_json(b) for b in m.basis],
        "derived_series": series,
        "solvable": solvable,
        "perfect": is_perfect(m),
    }


# -- commands -------------------------------------------------------------------

def cmd_centralizer(p: Problem, args) -> dict:
    d = p.option("max_degree", args.max_degree, 6)
    m = p.algebra(p.option("cap", args.cap, 200))
    g = centralizer_up_to(m, d)
    closure = check_directional_closure(g)
    return {
        "command": "centralizer",
        "algebra": _algebra_json(m),
        "max_degree": d,
        "constant_fields": len(g.per_degree[0]),
        "dimensions": [len(g.per_degree[k]) for k in range(1, d + 1)],
        "bases": {str(k): [f.to_strings() for f in g.per_degree[k]] for k in range(1, d + 1)},
        "closure_check": {"pairs_checked": closure.pairs_checked, "violations": closure.violations},
    }


def cmd_invariants(p: Problem, args) -> dict:
    d = p.option("max_degree", args.max_degree, 6)
    m = p.algebra(p.option("cap", args.cap, 200))
    report = {"command": "invariants", "algebra": _algebra_json(m), "max_degree": d}
    if args.alpha is not None:
        alpha = _rationals(args.alpha)
        found = {str(k): [str(phi) for phi in relative_invariant_space(m, alpha, k)] for k in range(1, d + 1)}
        report["alpha"] = [format_rational(a) for a in alpha]
        report["relative_invariants"] = found
        if any(alpha) and is_perfect(m):
            report["note"] = "the algebra is perfect, so a nonzero linear form admits no relative invariants"
    else:
        report["invariants"] = {str(k): [str(phi) for phi in invariant_space(m, k)] for k in range(1, d + 1)}
    prof = diagonal_profile(m)
    if prof is not None and m.dim == 1:
        report["resonance_lattice"] = resonance_lattice(prof.spectrum(0), d).to_json()
    return report


def cmd_finiteness(p: Problem, args) -> dict:
    d = p.option("max_degree", args.max_degree, 6)
    m = p.algebra(p.option("cap", args.cap, 200))
    verdict = finiteness_report(m, d)
    report = {"command": "finiteness", "algebra": _algebra_json(m), "searched_bound": d}
    report.update(verdict.to_json())
    if isinstance(verdict, FiniteCertified) and verdict.max_degree > 1:
        g = centralizer_up_to(m, verdict.max_degree + 1)
        nil = nilpotency_witness(g, verdict)
        report["certificate"]["nilpotency"] = {
            "pairs_checked": nil.pairs_checked,
            "vanishing_pairs": [list(t) for t in nil.table],
            "violations": [list(t) for t in nil.violations],
        }
    return report


def _solve_problem(p: Problem, args):
    """Returns (solution, residual, rhs callable, description)."""
    cap = p.option("cap", args.cap, 200)
    d = p.option("max_degree", args.max_degree, 6)
    y0 = p.option("y0", args.y0, None)
    if y0 is None:
        raise ParseError("solve needs an initial value (--y0 or options.y0)")
    y = _rationals(y0) if isinstance(y0, str) else [parse_rational(v) for v in y0]
    t0 = parse_rational(p.option("t0", args.t0, "0"))
    m = p.algebra(cap)
    if p.system is not None:
        try:
            seeds = [parse_field(s, p.n) for s in p.system["seeds"]]
            coefs = [Coefficient(tuple(parse_rational(c) for c in rec["sigma"]),
                                 parse_rational(rec.get("alpha", "0")))
                     for rec in p.system["coefficients"]]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed system block: {exc}") from None
        family = close_family(m, seeds, cap=cap)
        system = EDESystem(tuple(family.seeds), tuple(coefs))
        x = solve_elementary(family, system, y, t0)
        return x, system_residual(x, family, system), system_rhs(family, system), {
            "mode": "system", "family_size": len(family.fields), "system": system.to_json()}
    if p.field is not None:
        if t0:
            raise UnsupportedInput("autonomous fields are solved from t0 = 0")
        red = chen_reduce(m, p.field, d, cap=cap)
        x = red.solve(y)
        return x, field_residual(x, p.field), field_rhs(p.field), {
            "mode": "field", "linear_part": _matrix_json(red.linear),
            "family_size": len(red.family.fields),
            "transport": [[e.to_json() for e in row] for row in red.transport]}
    raise ParseError("solve needs a 'system' or a 'field' block")


def cmd_solve(p: Problem, args) -> dict:
    x, residual, rhs, info = _solve_problem(p, args)
    t0 = parse_rational(p.option("t0", args.t0, "0"))
    report = {"command": "solve", **info,
              "t0": format_rational(t0),
              "solution": vec_to_json(x),
              "polynomial_in_t": all(c.is_polynomial() for c in x),
              "exact_residual_zero": vec_is_zero(residual),
              "initial_value": [format_rational(v) for v in vec_value_at(x, t0)]}
    if args.verify is not None:
        t_end, steps = float(args.verify[0]), int(args.verify[1])
        err = verify_numeric(x, rhs, [float(v) for v in vec_value_at(x, t0)], (float(t0), t_end), steps)
        report["numeric"] = {"t_end": t_end, "steps": steps, "max_error": err, "tol": args.tol,
                             "ok": err <= args.tol}
    return report


def cmd_normal_form(p: Problem, args) -> dict:
    if p.field is None:
        raise ParseError("normal-form needs a 'field' block")
    d = p.option("max_degree", args.max_degree, 6)
    sym = p.symmetry
    if args.symmetry is not None:
        sym = QMatrix.diag(_rationals(args.symmetry))
    f = FormalField.from_field(p.field, d)
    res = normal_form(f, d, sym)
    report = {"command": "normal-form", "max_degree": d,
              "symmetry": _matrix_json(sym) if sym is not None else None}
    report.update(res.to_json())
    return report


def cmd_verify(p: Problem, args) -> dict:
    """Re-check a saved solve or finiteness report against the problem."""
    if args.report is None:
        raise ParseError("verify needs --report <saved report>")
    try:
        saved = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot load report: {exc}") from None
    kind = saved.get("command")
    checks = {}
    if kind == "solve":
        x = vec_from_json(saved["solution"], p.n)
        t0 = parse_rational(saved.get("t0", "0"))
        cap = p.option("cap", args.cap, 200)
        m = p.algebra(cap)
        if p.system is not None:
            seeds = [parse_field(s, p.n) for s in p.system["seeds"]]
            family = close_family(m, seeds, cap=cap)
            coefs = [Coefficient(tuple(parse_rational(c) for c in rec["sigma"]),
                                 parse_rational(rec.get("alpha", "0")))
                     for rec in p.system["coefficients"]]
            system = EDESystem(tuple(family.seeds), tuple(coefs))
            residual, rhs = system_residual(x, family, system), system_rhs(family, system)
        elif p.field is not None:
            residual, rhs = field_residual(x, p.field), field_rhs(p.field)
        else:
            raise ParseError("problem has neither 'system' nor 'field'")
        y0 = p.option("y0", args.y0, None)
        if y0 is not None:
            y = _rationals(y0) if isinstance(y0, str) else [parse_rational(v) for v in y0]
            checks["initial_value"] = list(vec_value_at(x, t0)) == y
        checks["exact_residual_zero"] = vec_is_zero(residual)
        t_end, steps = (1.0, 1000) if args.verify is None else (float(args.verify[0]), int(args.verify[1]))
        err = verify_numeric(x, rhs, [float(v) for v in vec_value_at(x, t0)], (float(t0), t_end), steps)
        checks["numeric_within_tol"] = err <= args.tol
    elif kind == "finiteness":
        m = p.algebra(p.option("cap", args.cap, 200))
        cert = saved.get("certificate", {})
        if saved.get("verdict") == "InfiniteCertified":
            phi = parse_poly(cert["witness"], p.n)
            try:
                infinite_certificate(m, phi, int(cert.get("powers_checked", 3)))
                checks["witness_certificate"] = True
            except (ValueError, CentraError):
                checks["witness_certificate"] = False
        elif saved.get("verdict") == "FiniteCertified":
            combo = [parse_rational(c) for c in cert["combination"]]
            mat = m.element(combo) if len(combo) == m.dim else None
            diag = [parse_rational(c) for c in cert["diagonal"]]
            checks["combination_matches"] = mat is not None and mat.is_diagonal() and list(mat.diagonal()) == diag
            checks["same_sign"] = bool(diag) and (all(v < 0 for v in diag) or all(v > 0 for v in diag))
        else:
            checks["nothing_certified"] = True
    else:
        raise ParseError(f"cannot verify a report of kind {kind!r}")
    return {"command": "verify", "report_kind": kind, "checks": checks, "ok": all(checks.values())}


COMMANDS = {
    "centralizer": cmd_centralizer,
    "invariants": cmd_invariants,
    "finiteness": cmd_finiteness,
    "solve": cmd_solve,
    "normal-form": cmd_normal_form,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="centra", description="Polynomial centralizers of linear Lie algebras.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("problem", help="problem file (JSON)")
    ap.add_argument("--max-degree", type=int, default=None, help="degree bound (default 6)")
    ap.add_argument("--cap", type=int, default=None, help="algebra/family size cap (default 200)")
    ap.add_argument("--alpha", default=None, help="linear form values, comma separated")
    ap.add_argument("--symmetry", default=None, help="diagonal symmetry entries, comma separated")
    ap.add_argument("--y0", default=None, help="initial value, comma separated rationals")
    ap.add_argument("--t0", default=None, help="initial time (rational)")
    ap.add_argument("--verify", nargs=2, metavar=("T_END", "STEPS"), default=None)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--report", default=None, help="saved report, for the verify command")
    ap.add_argument("--output", default=None, help="write the report here instead of stdout")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem)
        report = COMMANDS[args.command](problem, args)
    except CentraError as exc:
        print(json.dumps(exc.to_json()), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if report.get("ok") is False or report.get("numeric", {}).get("ok") is False:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
