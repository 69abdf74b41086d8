"""Command-line front end.

    borel-stokes kernel --alpha 2 --grid 0:4:9
    borel-stokes sum    --problem heat.json --theta 0.5 --t-mod 0.1 --t-arg 0.3
    borel-stokes stokes --problem heat.json
    borel-stokes jump   --problem heat.json --line 0 --t-mod 0.1 --route all

Exit codes: 0 success, 1 usage, 2 numeric non-convergence, 3 singular
direction, 4 domain guard, 5 not applicable.  Angles are printed on the
universal cover together with the period.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import fields
from fractions import Fraction

import numpy as np

from .borel import QuadratureSpec, RiemannPoint, borel_sum, sum_on_grid
from .datum import datum_from_json
from .errors import BorelStokesError, NoStokesLines
from .family import maximal_family, verify_family
from .formal import Equation, formal_solution, gevrey_estimate, optimal_truncation
from .special_fn import KernelParams, kernel_values
from .stokes import (anti_stokes_directions, jump_closed_form, jump_quadrature, residue_jump,
                     singular_directions)

__all__ = ["main", "load_problem", "Problem"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Problem:
    def __init__(self, eq, datum, quad):
        self.eq = eq
        self.datum = datum
        self.quad = quad


_QUAD_KEYS = {f.name for f in fields(QuadratureSpec)}


def load_problem(obj: dict, tol: float | None = None) -> Problem:
    """Problem from its JSON object {"p", "q", "datum", "quad"}."""
    if not isinstance(obj, dict):
        raise UsageError("problem file must hold a JSON object")
    extra = set(obj) - {"p", "q", "datum", "quad"}
    if extra:
        raise UsageError(f"unknown problem keys: {sorted(extra)}")
    for key in ("p", "q", "datum"):
        if key not in obj:
            raise UsageError(f"problem file lacks '{key}'")
    try:
        eq = Equation(obj["p"], obj["q"])
        datum = datum_from_json(obj["datum"])
        qd = dict(obj.get("quad") or {})
        bad = set(qd) - _QUAD_KEYS
        if bad:
            raise UsageError(f"unknown quad keys: {sorted(bad)}")
        if tol is not None:
            qd["tol"] = tol
        quad = QuadratureSpec(**qd)
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid problem: {exc}") from exc
    return Problem(eq, datum, quad)


def _read_problem(args) -> Problem:
    if not args.problem:
        raise UsageError("--problem FILE is required")
    try:
        with open(args.problem) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.problem}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.problem} is not valid JSON: {exc}") from exc
    return load_problem(obj, args.tol)


def _grid(text: str) -> np.ndarray:
    """start:stop:num, or a comma-separated list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return np.linspace(float(a), float(b), n)
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad grid '{text}': use start:stop:num or a,b,c") from exc


def _t(args, eq) -> RiemannPoint:
    if args.t_mod is None:
        raise UsageError("--t-mod is required")
    if not args.t_mod > 0:
        raise UsageError("--t-mod must be positive")
    return RiemannPoint(args.t_mod, args.t_arg, eq.period)


def _z(args) -> complex:
    return complex(args.z_re, args.z_im)


def _pair(w: complex):
    return [w.real, w.imag]


# -- subcommands -------------------------------------------------------------

def cmd_kernel(args):
    if args.alpha is None:
        raise UsageError("--alpha is required")
    try:
        alpha = Fraction(args.alpha)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad alpha '{args.alpha}'") from exc
    if alpha <= 1:
        raise UsageError("alpha must exceed 1")
    params = KernelParams(alpha, **({"tol": args.tol} if args.tol else {}))
    x = _grid(args.grid or "0")
    tau = x * np.exp(1j * args.tau_arg)
    vals = kernel_values(params, tau)
    rows = [(w.real, w.imag, c.real, c.imag) for w, c in zip(tau, vals)]
    header = ("tau_re", "tau_im", "C_re", "C_im")
    if args.format == "json":
        return {"alpha": str(alpha), "rows": [dict(zip(header, r)) for r in rows]}
    return header, rows


def cmd_sum(args):
    prob = _read_problem(args)
    if args.theta is None:
        raise UsageError("--theta is required")
    z = _z(args)
    if args.grid:
        ts = [RiemannPoint(float(m), args.t_arg, prob.eq.period) for m in _grid(args.grid)]
        cells = [row[0] for row in sum_on_grid(prob.eq, prob.datum, args.theta, ts, [z],
                                               prob.quad, args.force_general)]
        header = ("t_mod", "t_arg", "z_re", "z_im", "u_re", "u_im", "err_est", "error")
        rows = []
        for c in cells:
            if c.ok:
                rows.append((c.t.modulus, c.t.argument, z.real, z.imag, c.result.value.real,
                             c.result.value.imag, c.result.err_est, ""))
            else:
                rows.append((c.t.modulus, c.t.argument, z.real, z.imag, math.nan, math.nan,
                             math.nan, f"{type(c.error).__name__}: {c.error}"))
        if args.format == "json":
            return {"period": prob.eq.period, "rows": [dict(zip(header, r)) for r in rows]}
        return header, rows
    r = borel_sum(prob.eq, prob.datum, args.theta, _t(args, prob.eq), z, prob.quad,
                  args.force_general)
    out = r.to_json()
    out["period"] = prob.eq.period
    return out


def cmd_formal(args):
    prob = _read_problem(args)
    f = formal_solution(prob.eq, prob.datum)
    z = _z(args)
    out = {"period": prob.eq.period, "s": float(prob.eq.s),
           "gevrey_estimate": gevrey_estimate(f, z, args.n_max)}
    if args.t_mod is not None:
        n_star, value, err = optimal_truncation(f, _t(args, prob.eq), z, args.n_max)
        out.update({"N_star": n_star, "value": _pair(value), "err_est": err})
    return out


def cmd_stokes(args):
    prob = _read_problem(args)
    st = singular_directions(prob.eq, prob.datum)
    an = anti_stokes_directions(prob.eq, prob.datum)
    return {"stokes": [L.direction for L in st], "anti_stokes": [L.direction for L in an],
            "period": prob.eq.period, "lines": [L.to_json() for L in st]}


def _residue_window(eq, lines, idx):
    d = lines[idx].direction
    w = eq.half_opening / 2.0
    for j, L in enumerate(lines):
        if j != idx:
            sep = abs((L.direction - d + eq.period / 2) % eq.period - eq.period / 2)
            w = min(w, sep / 2.0)
    return d - w, d + w


def cmd_jump(args):
    prob = _read_problem(args)
    eq, datum, quad = prob.eq, prob.datum, prob.quad
    lines = singular_directions(eq, datum)
    if not lines:
        raise NoStokesLines("datum has no poles, hence no Stokes lines")
    if not 0 <= args.line < len(lines):
        raise UsageError(f"--line must lie in 0..{len(lines) - 1}")
    line = lines[args.line]
    # t defaults to the Stokes line itself
    t_arg = line.direction if args.t_arg_given is None else args.t_arg_given
    t = RiemannPoint(args.t_mod if args.t_mod else 0.1, t_arg, eq.period)
    z = _z(args)
    routes = ["closed", "residue", "quad"] if args.route == "all" else [args.route]
    out = {"line": line.to_json(), "period": eq.period, "routes": {}}
    for r in routes:
        if r == "closed":
            res = jump_closed_form(eq, datum, line, t, z, quad.eps_sector)
        elif r == "residue":
            th1, th2 = _residue_window(eq, lines, args.line)
            res = residue_jump(eq, datum, th1, th2, t, z, quad)
        elif r == "quad":
            res = jump_quadrature(eq, datum, line, t, z, quad, args.force_general)
        else:
            raise UsageError(f"unknown route '{r}'")
        out["routes"][r] = res.to_json()
    return out


def cmd_family(args):
    prob = _read_problem(args)
    members = maximal_family(prob.eq, prob.datum, args.eps)
    out = {"period": prob.eq.period, "members": [m.to_json() for m in members]}
    if args.verify:
        out["verification"] = verify_family(prob.eq, prob.datum, members, prob.quad)
    return out


def cmd_verify(args):
    prob = _read_problem(args)
    members = maximal_family(prob.eq, prob.datum, args.eps)
    return verify_family(prob.eq, prob.datum, members, prob.quad)


COMMANDS = {"kernel": cmd_kernel, "sum": cmd_sum, "formal": cmd_formal, "stokes": cmd_stokes,
            "jump": cmd_jump, "family": cmd_family, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="borel-stokes",
                 description="Borel sums, Stokes lines and jumps for d_t^p u = d_z^q u.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--problem", help="problem file (JSON)")
        sp.add_argument("--theta", type=float, help="summation direction")
        sp.add_argument("--t-mod", type=float)
        sp.add_argument("--t-arg", type=float, default=None)
        sp.add_argument("--z-re", type=float, default=0.0)
        sp.add_argument("--z-im", type=float, default=0.0)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--route", default="all", choices=["closed", "residue", "quad", "all"])
        sp.add_argument("--grid", help="start:stop:num or a,b,c")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=["json", "csv"],
                        default="csv" if name == "kernel" else "json")
        sp.add_argument("--force-general", action="store_true",
                        help="use the general kernel even for the heat equation")
        sp.add_argument("--verify", action="store_true")
        sp.add_argument("--eps", type=float, default=0.1, help="family sector shrinkage")
        sp.add_argument("--line", type=int, default=0, help="Stokes line index")
        sp.add_argument("--alpha", help="kernel order, e.g. 2 or 3/2")
        sp.add_argument("--tau-arg", type=float, default=0.0, help="argument of the tau grid")
        sp.add_argument("--n-max", type=int, default=60, help="formal series depth")
    return ap


def _render(result, fmt) -> str:
    if isinstance(result, tuple):
        header, rows = result
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
        return buf.getvalue()
    if fmt == "csv":
        raise UsageError("this subcommand has no CSV form without --grid")
    return json.dumps(result, indent=2) + "\n"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        args.t_arg_given = args.t_arg
        if args.t_arg is None:
            args.t_arg = 0.0
        text = _render(COMMANDS[args.command](args), args.format)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except BorelStokesError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main_entry():
    sys.exit(main())
