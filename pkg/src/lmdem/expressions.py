"""One-line energy-density and boundary-value expressions.

Energy densities are written over displacement-gradient symbols
(ux = du/dx, vy = dv/dy, ...); boundary/body-force values use the
spatial symbols x, y, z. Evaluation works elementwise on numpy arrays,
and exact partial derivatives are computed by forward accumulation in
the same pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GRAD_SYMBOLS = ("ux", "uy", "uz", "vx", "vy", "vz", "wx", "wy", "wz")
SPATIAL_SYMBOLS = ("x", "y", "z")
GRAD_SYMBOLS_2D = ("ux", "uy", "vx", "vy")

FUNCTIONS = ("log", "exp", "sqrt", "sin", "cos", "tanh", "abs")


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"at offset {offset}: {message}")


class UnknownSymbol(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown symbol '{name}'")


class UnknownFunction(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown function '{name}'")


class UnboundSymbol(ExprError):
    pass


class DomainError(ExprError):
    def __init__(self, func: str, argument):
        self.func = func
        self.argument = argument
        super().__init__(f"{func} of non-positive argument")


class DimensionMismatch(ExprError):
    def __init__(self, symbols: set[str]):
        self.symbols = set(symbols)
        super().__init__(f"symbols {sorted(symbols)} are not available in 2D")


# AST nodes ----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / **
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


ExprAst = object  # Num | Sym | Neg | Bin | Call


# Parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, symbols):
        self.text = text
        self.pos = 0
        self.symbols = set(symbols)

    def error(self, msg: str):
        raise ExprSyntaxError(self.pos, msg)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, k: int = 1) -> str:
        return self.text[self.pos : self.pos + k]

    def accept(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def parse(self) -> ExprAst:
        node = self.additive()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected character {self.text[self.pos]!r}")
        return node

    def additive(self) -> ExprAst:
        node = self.multiplicative()
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                node = Bin("+", node, self.multiplicative())
            elif ch == "-":
                self.pos += 1
                node = Bin("-", node, self.multiplicative())
            else:
                return node

    def multiplicative(self) -> ExprAst:
        node = self.unary()
        while True:
            self.skip_ws()
            if self.peek(2) == "**":
                return node  # handled inside unary/power
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                node = Bin("*", node, self.unary())
            elif ch == "/":
                self.pos += 1
                node = Bin("/", node, self.unary())
            else:
                return node

    def unary(self) -> ExprAst:
        self.skip_ws()
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        if self.peek() == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        self.skip_ws()
        if self.peek(2) == "**":
            self.pos += 2
            # right-associative; exponent may carry a unary minus
            return Bin("**", base, self.unary())
        return base

    def atom(self) -> ExprAst:
        self.skip_ws()
        if self.pos >= len(self.text):
            self.error("unexpected end of expression")
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            node = self.additive()
            if not self.accept(")"):
                self.error("expected ')'")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.identifier()
        self.error(f"unexpected character {ch!r}")

    def number(self) -> ExprAst:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            probe = self.pos + 1
            if probe < len(text) and text[probe] in "+-":
                probe += 1
            if probe < len(text) and text[probe].isdigit():
                self.pos = probe
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
        try:
            return Num(float(text[start : self.pos]))
        except ValueError:
            self.pos = start
            self.error(f"bad numeric literal {text[start:self.pos + 1]!r}")

    def identifier(self) -> ExprAst:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start : self.pos]
        self.skip_ws()
        if self.peek() == "(":
            if name not in FUNCTIONS:
                raise UnknownFunction(name)
            self.pos += 1
            arg = self.additive()
            if not self.accept(")"):
                self.error("expected ')' after function argument")
            return Call(name, arg)
        if name not in self.symbols:
            raise UnknownSymbol(name)
        return Sym(name)


def parse(text: str, symbols=GRAD_SYMBOLS) -> ExprAst:
    """Parse a one-line expression over the given symbol set."""
    return _Parser(text, symbols).parse()


def symbols_of(ast: ExprAst) -> set[str]:
    if isinstance(ast, Sym):
        return {ast.name}
    if isinstance(ast, Num):
        return set()
    if isinstance(ast, Neg):
        return symbols_of(ast.arg)
    if isinstance(ast, Call):
        return symbols_of(ast.arg)
    return symbols_of(ast.left) | symbols_of(ast.right)


def validate(ast: ExprAst, dim: int) -> set[str]:
    """Used-symbol report; rejects 3D-only gradient symbols when dim == 2."""
    used = symbols_of(ast)
    if dim == 2:
        bad = used - set(GRAD_SYMBOLS_2D) - set(SPATIAL_SYMBOLS[:2])
        if bad:
            raise DimensionMismatch(bad)
    return used


# Evaluation ---------------------------------------------------------------

def _check_positive(func: str, value):
    arr = np.asarray(value)
    if np.any(arr <= 0):
        raise DomainError(func, value)


_FUNC_EVAL = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "abs": np.abs,
}

# df/dx given (x, f(x))
_FUNC_DERIV = {
    "log": lambda x, f: 1.0 / x,
    "exp": lambda x, f: f,
    "sqrt": lambda x, f: 0.5 / f,
    "sin": lambda x, f: np.cos(x),
    "cos": lambda x, f: -np.sin(x),
    "tanh": lambda x, f: 1.0 - f * f,
    "abs": lambda x, f: np.sign(x),
}


def _eval(ast, bindings, want_grad: bool):
    """Returns (value, grads) where grads maps symbol -> partial (or None)."""
    if isinstance(ast, Num):
        return ast.value, ({} if want_grad else None)
    if isinstance(ast, Sym):
        if ast.name not in bindings:
            raise UnboundSymbol(f"symbol '{ast.name}' has no binding")
        v = bindings[ast.name]
        return v, ({ast.name: np.ones_like(np.asarray(v, dtype=float))} if want_grad else None)
    if isinstance(ast, Neg):
        v, g = _eval(ast.arg, bindings, want_grad)
        return -v, ({s: -d for s, d in g.items()} if want_grad else None)
    if isinstance(ast, Call):
        x, g = _eval(ast.arg, bindings, want_grad)
        if ast.func in ("log", "sqrt"):
            _check_positive(ast.func, x)
        f = _FUNC_EVAL[ast.func](x)
        if not want_grad:
            return f, None
        df = _FUNC_DERIV[ast.func](x, f)
        return f, {s: df * d for s, d in g.items()}
    if isinstance(ast, Bin):
        return _eval_bin(ast, bindings, want_grad)
    raise TypeError(f"not an expression node: {ast!r}")


def _merge(ga, gb, fa, fb):
    out = {}
    for s, d in ga.items():
        out[s] = fa(d)
    for s, d in gb.items():
        if s in out:
            out[s] = out[s] + fb(d)
        else:
            out[s] = fb(d)
    return out


def _eval_bin(ast, bindings, want_grad):
    a, ga = _eval(ast.left, bindings, want_grad)
    b, gb = _eval(ast.right, bindings, want_grad)
    op = ast.op
    if op == "+":
        v = a + b
        g = _merge(ga, gb, lambda d: d, lambda d: d) if want_grad else None
    elif op == "-":
        v = a - b
        g = _merge(ga, gb, lambda d: d, lambda d: -d) if want_grad else None
    elif op == "*":
        v = a * b
        g = _merge(ga, gb, lambda d: d * b, lambda d: a * d) if want_grad else None
    elif op == "/":
        v = a / b
        g = (
            _merge(ga, gb, lambda d: d / b, lambda d: -a * d / (b * b))
            if want_grad
            else None
        )
    elif op == "**":
        v, g = _eval_pow(a, ga, b, gb, want_grad)
    else:
        raise TypeError(f"unknown operator {op}")
    return v, g


def _eval_pow(a, ga, b, gb, want_grad):
    b_const = gb is None or not gb
    if b_const and float(np.min(np.asarray(b))) == float(np.max(np.asarray(b))):
        exponent = float(np.asarray(b).flat[0]) if np.asarray(b).size else float(b)
    else:
        exponent = None
    if exponent is not None and float(exponent).is_integer():
        v = a ** exponent
        if not want_grad:
            return v, None
        dfa = exponent * a ** (exponent - 1) if exponent != 0 else 0.0
        return v, {s: dfa * d for s, d in ga.items()}
    # non-integer exponent requires a positive base
    _check_positive("**", a)
    v = a ** b
    if not want_grad:
        return v, None
    g = {}
    for s, d in (ga or {}).items():
        g[s] = v * b / a * d
    for s, d in (gb or {}).items():
        term = v * np.log(a) * d
        g[s] = g[s] + term if s in g else term
    return v, g


def evaluate(ast: ExprAst, bindings: dict) -> float | np.ndarray:
    """Evaluate the expression at the given symbol bindings."""
    v, _ = _eval(ast, bindings, want_grad=False)
    return v


def partials(ast: ExprAst, bindings: dict):
    """Value plus exact partial derivatives with respect to every bound
    symbol, in a single forward-accumulation pass."""
    v, g = _eval(ast, bindings, want_grad=True)
    zeros = np.zeros_like(np.asarray(v, dtype=float))
    grads = {s: g.get(s, zeros) + zeros for s in bindings}
    return v, grads


# Pretty printing ----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "**": 4}


def pretty(ast: ExprAst) -> str:
    """Render the tree back to parseable text with minimal parentheses."""
    text, _ = _pretty(ast)
    return text


def _pretty(ast):
    if isinstance(ast, Num):
        v = ast.value
        if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
            return repr(int(v)) if float(int(v)) == v else repr(v), 5
        return repr(v), 5
    if isinstance(ast, Sym):
        return ast.name, 5
    if isinstance(ast, Call):
        inner, _ = _pretty(ast.arg)
        return f"{ast.func}({inner})", 5
    if isinstance(ast, Neg):
        inner, prec = _pretty(ast.arg)
        if prec < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}", _PREC["neg"]
    left, lp = _pretty(ast.left)
    right, rp = _pretty(ast.right)
    prec = _PREC[ast.op]
    if lp < prec or (ast.op == "**" and lp <= prec):
        left = f"({left})"
    if rp < prec or (ast.op != "**" and rp <= prec):
        right = f"({right})"
    return f"{left} {ast.op} {right}" if ast.op != "**" else f"{left}**{right}", prec


def grad_bindings(grad: np.ndarray, dim: int) -> dict[str, np.ndarray]:
    """Bindings for the displacement-gradient symbols from a batch of
    gradients shaped (..., components, dim); entry [i, j] is
    d(component i)/d(axis j)."""
    grad = np.asarray(grad)
    rows = "uvw"[: grad.shape[-2]]
    cols = "xyz"[:dim]
    out = {}
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            out[r + c] = np.asarray(grad)[..., i, j]
    return out
