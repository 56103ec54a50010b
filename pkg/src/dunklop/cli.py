"""Command-line front end: JSON problem configs in, CSV/JSON results out.

Subcommands expose the individual operator layers (appell, indicatrix,
eigenvalues, translate, mpcheck, conv) next to the full Cauchy-problem
pipeline (solve). Exit codes tell scripts what went wrong: 1 for input
errors, 2 for the resonance case, 3 for a numerical residual failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import functionals
from .dunkl_kernel import Indicatrix, indicatrix_eval, indicatrix_zeros
from .errors import (ConfigError, DunklopError, ExpressionError,
                     ResidualError, ResonanceError)
from .heaviside import CauchyProblem, oracle_solve, solve_nonlocal_cauchy
from .poly_ops import DunklParam, Polynomial, appell_sequence
from .scalar_grid import ParityGrid, decompose_parity, parse_scalar
from .translation import TranslationKernel, mp_defect, translate

_FUNCS = {"sin": np.sin, "cos": np.cos, "sinh": np.sinh, "cosh": np.cosh,
          "exp": np.exp, "abs": np.abs}

_NUM_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[a-zA-Z]+")


def _tokenize(src: str):
    toks = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUM_RE.match(src, i)
        if m:
            toks.append(("num", float(m.group()), i))
            i = m.end()
            continue
        m = _NAME_RE.match(src, i)
        if m:
            toks.append(("name", m.group(), i))
            i = m.end()
            continue
        if ch in "+-*/^()":
            toks.append(("op", ch, i))
            i += 1
            continue
        raise ExpressionError(f"stray character {ch!r}", i,
                              ("number", "name", "operator"))
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    """Recursive descent over: expr > term > unary > power > atom.

    Precedence: ^ above unary minus above * / above + -; the caret is
    right-associative and its exponent must fold to an integer constant
    with no x inside.
    """

    def __init__(self, src: str):
        if not src.strip():
            raise ExpressionError("empty expression", 0, ("expression",))
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        kind, val, pos = self.peek()
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionError(f"unexpected {what}", pos, expected)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            _, _, pos = self.take()
            exp_node = self.unary()  # right associative: a^b^c = a^(b^c)
            exp = _const_int(exp_node, pos)
            return ("pow", base, exp)
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return ("num", val)
        if kind == "name":
            self.take()
            if val == "x":
                return ("x",)
            if val in _FUNCS:
                if self.peek()[:2] != ("op", "("):
                    self.fail(("'('",))
                self.take()
                arg = self.expr()
                if self.peek()[:2] != ("op", ")"):
                    self.fail(("')'",))
                self.take()
                return ("call", val, arg)
            raise ExpressionError(f"unknown name {val!r}", pos,
                                  ("x",) + tuple(sorted(_FUNCS)))
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.fail(("')'",))
            self.take()
            return node
        self.fail(("number", "'x'", "function", "'('"))


def _const_int(node, pos: int) -> int:
    if _uses_x(node):
        raise ExpressionError("exponent must be a constant", pos, ("integer",))
    v = eval_expression(node, 0.0)
    if abs(v - round(v.real)) > 1e-12:
        raise ExpressionError(f"exponent {v} is not an integer", pos, ("integer",))
    return int(round(v.real))


def _uses_x(node) -> bool:
    if node[0] == "x":
        return True
    return any(_uses_x(c) for c in node[1:] if isinstance(c, tuple))


def parse_expression(src: str):
    """AST for a one-variable expression; raises ExpressionError with offset."""
    return _Parser(src).parse()


def eval_expression(node, x):
    kind = node[0]
    if kind == "num":
        return node[1] * np.ones_like(np.asarray(x, dtype=float)) \
            if np.ndim(x) else node[1]
    if kind == "x":
        return np.asarray(x, dtype=float) if np.ndim(x) else x
    if kind == "neg":
        return -eval_expression(node[1], x)
    if kind == "add":
        return eval_expression(node[1], x) + eval_expression(node[2], x)
    if kind == "sub":
        return eval_expression(node[1], x) - eval_expression(node[2], x)
    if kind == "mul":
        return eval_expression(node[1], x) * eval_expression(node[2], x)
    if kind == "div":
        with np.errstate(divide="ignore", invalid="ignore"):
            return eval_expression(node[1], x) / eval_expression(node[2], x)
    if kind == "pow":
        base = eval_expression(node[1], x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.power(base, node[2]) if np.ndim(base) else base ** node[2]
    if kind == "call":
        return _FUNCS[node[1]](eval_expression(node[2], x))
    raise ValueError(f"bad node {node!r}")


def _expr_grid(src: str, xmax: float, n: int) -> ParityGrid:
    ast = parse_expression(src)
    return decompose_parity(lambda t: eval_expression(ast, t), xmax, n)


# --- problem config ---

_CONFIG_FIELDS = {"k", "P", "phi", "alpha", "f", "grid", "mode"}
_GRID_FIELDS = {"xmax", "n"}


def _scalar(v, where: str):
    if isinstance(v, str):
        try:
            return parse_scalar(v)
        except Exception as e:
            raise ConfigError(f"{where}: bad scalar {v!r} ({e})") from None
    if isinstance(v, bool):
        raise ConfigError(f"{where}: booleans are not scalars")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, list) and len(v) == 2 \
            and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected number, 'p/q' string, or [re, im] pair")


@dataclass(frozen=True)
class ProblemConfig:
    """Validated solve configuration (see README for the JSON shape)."""

    k: object
    P: tuple           # leading coefficient first
    phi: functionals.Functional
    alpha: tuple
    f: str
    xmax: float
    n: int
    mode: str

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        for req in ("k", "P", "phi", "alpha", "f"):
            if req not in d:
                raise ConfigError(f"missing config field: {req}")
        k = _scalar(d["k"], "k")
        if isinstance(k, complex) or k < 0:
            raise ConfigError("k must be a real value >= 0")
        if not isinstance(d["P"], list) or len(d["P"]) < 2:
            raise ConfigError("P must list the m+1 coefficients, leading first")
        P = tuple(_scalar(v, "P") for v in d["P"])
        if P[0] == 0:
            raise ConfigError("leading coefficient of P must be nonzero")
        try:
            phi = functionals.from_config(d["phi"])
        except DunklopError as e:
            raise ConfigError(f"phi: {e}") from None
        if not isinstance(d["alpha"], list):
            raise ConfigError("alpha must be a list")
        alpha = tuple(_scalar(v, "alpha") for v in d["alpha"])
        m = len(P) - 1
        if len(alpha) != m:
            raise ConfigError(f"alpha must have {m} entries for degree {m}")
        if not isinstance(d["f"], str):
            raise ConfigError("f must be an expression string")
        grid = d.get("grid", {})
        if not isinstance(grid, dict) or set(grid) - _GRID_FIELDS:
            raise ConfigError("grid must be an object with fields xmax, n")
        xmax = float(grid.get("xmax", 2.0))
        n = int(grid.get("n", 512))
        if xmax <= 0 or n < 16:
            raise ConfigError("grid needs xmax > 0 and n >= 16")
        mode = d.get("mode", "float")
        if mode not in ("exact", "float"):
            raise ConfigError("mode must be 'exact' or 'float'")
        return cls(k=k, P=P, phi=phi, alpha=alpha, f=d["f"],
                   xmax=xmax, n=n, mode=mode)


def _fmt17(v: float) -> str:
    return f"{v:.17g}"


def _write_solution_csv(path: Path, u: ParityGrid):
    xs = np.linspace(-u.xmax, u.xmax, 2 * u.n + 1)
    vals = u.signed_values()
    with open(path, "w", newline="\n") as fh:
        fh.write("x,u_re,u_im\n")
        for x, v in zip(xs, vals):
            fh.write(f"{_fmt17(x)},{_fmt17(v.real)},{_fmt17(v.imag)}\n")


def run_solve(cfg: ProblemConfig, out_dir: Path) -> int:
    """Solve pipeline driver: solution.csv + report.json in out_dir."""
    ast = parse_expression(cfg.f)
    f = decompose_parity(lambda t: eval_expression(ast, t), cfg.xmax, cfg.n)
    coeffs = [complex(c) for c in cfg.P[::-1]]  # ascending for Polynomial
    cp = CauchyProblem(cfg.k, cfg.phi, Polynomial(coeffs), cfg.alpha, f)
    u, report = solve_nonlocal_cauchy(cp)
    rep = report.to_dict()
    if cp.degree <= 6:
        uo = oracle_solve(cp)
        rep["oracle_diff_sup"] = float((u - uo).sup_norm())
    else:
        rep["oracle_diff_sup"] = None
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_solution_csv(out_dir / "solution.csv", u)
    with open(out_dir / "report.json", "w", newline="\n") as fh:
        json.dump(rep, fh, indent=2)
        fh.write("\n")
    return 0


def _frac_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return _fmt17(float(v.real)) if getattr(v, "imag", 0.0) == 0 else str(v)


def run_appell(args, out_dir: Path) -> int:
    k = parse_scalar(args.k)
    phi = functionals.from_config(_phi_arg(args.phi))
    if args.mode == "exact":
        k = Fraction(k) if not isinstance(k, Fraction) else k
        if not phi.exact:
            raise ConfigError("exact mode needs a functional with rational atoms")
    else:
        k = float(k)
    seq = appell_sequence(args.n, k, phi)
    data = [[_frac_str(c) for c in p.coeffs] for p in seq]
    _emit_json(out_dir, "appell.json", {"k": str(args.k), "coefficients": data})
    return 0


def run_indicatrix(args, out_dir: Path) -> int:
    phi = functionals.from_config(_phi_arg(args.phi))
    ind = Indicatrix.build(float(parse_scalar(args.k)), phi)
    lams = np.linspace(-args.radius, args.radius, args.count)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "indicatrix.csv", "w", newline="\n") as fh:
        fh.write("lam,E_re,E_im\n")
        for lam in lams:
            e = indicatrix_eval(ind, complex(lam))
            fh.write(f"{_fmt17(lam)},{_fmt17(e.real)},{_fmt17(e.imag)}\n")
    return 0


def run_eigenvalues(args, out_dir: Path) -> int:
    phi = functionals.from_config(_phi_arg(args.phi))
    ind = Indicatrix.build(float(parse_scalar(args.k)), phi)
    zeros = indicatrix_zeros(ind, args.radius)
    rows = [{"lam": [z.real, z.imag], "residual": abs(indicatrix_eval(ind, z))}
            for z in zeros]
    _emit_json(out_dir, "eigenvalues.json", {"radius": args.radius, "zeros": rows})
    return 0


def run_translate(args, out_dir: Path) -> int:
    k = float(parse_scalar(args.k))
    f = _expr_grid(args.f, args.xmax, args.grid_n)
    tk = TranslationKernel.build(k)
    g = translate(f, args.y, tk)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(-g.xmax, g.xmax, 2 * g.n + 1)
    vals = g.signed_values()
    with open(out_dir / "translate.csv", "w", newline="\n") as fh:
        fh.write("x,t_re,t_im\n")
        for x, v in zip(xs, vals):
            fh.write(f"{_fmt17(x)},{_fmt17(v.real)},{_fmt17(v.imag)}\n")
    return 0


def run_mpcheck(args, out_dir: Path) -> int:
    k = float(parse_scalar(args.k))
    phi = functionals.from_config(_phi_arg(args.phi))
    f = _expr_grid(args.f, args.xmax, args.grid_n)
    tk = TranslationKernel.build(k)
    lim = args.xmax - phi.radius - 2 * f.h
    if lim <= 0:
        raise ConfigError("grid too small for the functional's support")
    sample = np.linspace(-lim, lim, 41)
    d = mp_defect(f, phi, tk, sample)
    _emit_json(out_dir, "mpcheck.json", {"mp_defect": float(d)})
    print(json.dumps({"mp_defect": float(d)}))
    return 0


def run_conv(args, out_dir: Path) -> int:
    from .convolution import dunkl_conv_smallk
    from .functionals import apply as phi_apply
    k = float(parse_scalar(args.k))
    phi = functionals.from_config(_phi_arg(args.phi))
    f = _expr_grid(args.f, args.xmax, args.grid_n)
    g = _expr_grid(args.g, args.xmax, args.grid_n)
    fg = dunkl_conv_smallk(f, g, k, phi)
    gf = dunkl_conv_smallk(g, f, k, phi)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(-fg.xmax, fg.xmax, 2 * fg.n + 1)
    vals = fg.signed_values()
    with open(out_dir / "conv.csv", "w", newline="\n") as fh:
        fh.write("x,c_re,c_im\n")
        for x, v in zip(xs, vals):
            fh.write(f"{_fmt17(x)},{_fmt17(v.real)},{_fmt17(v.imag)}\n")
    defects = {"phi_defect": abs(phi_apply(phi, fg)),
               "commutativity": float((fg - gf).sup_norm())}
    _emit_json(out_dir, "conv.json", defects)
    print(json.dumps(defects))
    return 0


def _phi_arg(spec: str):
    s = spec.strip()
    if s.startswith("[") or s.startswith("{"):
        return json.loads(s)
    return s


def _emit_json(out_dir: Path, name: str, payload: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / name, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dunklop",
                                 description="nonlocal Cauchy problems for the Dunkl operator")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a configured Cauchy problem")
    sp.add_argument("--config", required=True, help="path to JSON problem config")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--grid-n", type=int, default=None, help="override grid n")
    sp.add_argument("--xmax", type=float, default=None, help="override grid xmax")
    sp.add_argument("--mode", choices=("exact", "float"), default=None)

    sp = sub.add_parser("appell", help="emit the polynomial sequence as JSON")
    sp.add_argument("--k", required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mode", choices=("exact", "float"), default="exact")
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("indicatrix", help="tabulate the indicatrix on a real interval")
    sp.add_argument("--k", required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--radius", type=float, default=5.0)
    sp.add_argument("--count", type=int, default=201)
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("eigenvalues", help="zeros of the indicatrix in a disc")
    sp.add_argument("--k", required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("translate", help="generalized translation of an expression")
    sp.add_argument("--k", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--xmax", type=float, default=2.0)
    sp.add_argument("--grid-n", type=int, default=512)
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("mpcheck", help="mean-periodicity defect of an expression")
    sp.add_argument("--k", required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--xmax", type=float, default=2.0)
    sp.add_argument("--grid-n", type=int, default=256)
    sp.add_argument("--out", default=".")

    sp = sub.add_parser("conv", help="convolution of two expressions (0 <= k < 1)")
    sp.add_argument("--k", required=True)
    sp.add_argument("--phi", required=True)
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--xmax", type=float, default=2.0)
    sp.add_argument("--grid-n", type=int, default=256)
    sp.add_argument("--out", default=".")
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = _build_argparser()
    args = ap.parse_args(argv)
    out_dir = Path(getattr(args, "out", "."))
    try:
        if args.command == "solve":
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
            if args.grid_n is not None or args.xmax is not None or args.mode is not None:
                grid = dict(raw.get("grid", {}))
                if args.grid_n is not None:
                    grid["n"] = args.grid_n
                if args.xmax is not None:
                    grid["xmax"] = args.xmax
                raw["grid"] = grid
                if args.mode is not None:
                    raw["mode"] = args.mode
            cfg = ProblemConfig.from_dict(raw)
            return run_solve(cfg, out_dir)
        if args.command == "appell":
            return run_appell(args, out_dir)
        if args.command == "indicatrix":
            return run_indicatrix(args, out_dir)
        if args.command == "eigenvalues":
            return run_eigenvalues(args, out_dir)
        if args.command == "translate":
            return run_translate(args, out_dir)
        if args.command == "mpcheck":
            return run_mpcheck(args, out_dir)
        if args.command == "conv":
            return run_conv(args, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except ResonanceError as e:
        print(f"resonance: {e}", file=sys.stderr)
        return 2
    except ResidualError as e:
        print(f"residual failure: {e}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError, DunklopError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
