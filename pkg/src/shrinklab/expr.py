"""Small expression language for maps f = (f1, f2): R^2 -> R^2.

Grammar (standard precedence, left-associative binaries, ``^`` above unary
minus, whitespace insignificant)::

    expr    :=  term (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' ['-'] INT)?
    atom    :=  NUMBER | 'x1' | 'x2' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    :=  'sin' | 'cos' | 'exp' | 'sqrt'

Exponents must be integer literals in [-6, 6], which keeps evaluation total
away from explicit poles.  Expressions evaluate in jet arithmetic, so results
carry exact derivatives through order 3.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import jets
from .jets import Jet3

__all__ = [
    "ExprError", "ExprLexError", "ExprSyntaxError", "ExprArityError",
    "ExprAst", "Const", "Var", "Unary", "Binary", "Pow",
    "parse", "to_source", "eval_jet",
]

_FUNCS = ("sin", "cos", "exp", "sqrt")
_MAX_EXPONENT = 6


class ExprError(ValueError):
    """Base for expression errors; ``position`` is a 0-based source offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ExprLexError(ExprError):
    pass


class ExprSyntaxError(ExprError):
    pass


class ExprArityError(ExprError):
    pass


# -- AST ---------------------------------------------------------------------

class ExprAst:
    """Base node; concrete kinds below."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(ExprAst):
    value: float


@dataclass(frozen=True)
class Var(ExprAst):
    index: int  # 1 or 2


@dataclass(frozen=True)
class Unary(ExprAst):
    op: str  # 'neg' | 'sin' | 'cos' | 'exp' | 'sqrt'
    child: ExprAst


@dataclass(frozen=True)
class Binary(ExprAst):
    op: str  # '+' | '-' | '*' | '/'
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Pow(ExprAst):
    base: ExprAst
    exponent: int


# -- lexer --------------------------------------------------------------------

_OPS = "+-*/^()"


def _tokenize(source: str):
    """Yield (kind, text, offset) with kind in {num, ident, op, end}."""
    toks = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprLexError(f"malformed number {text!r}", i) from None
            toks.append(("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(("ident", source[i:j], i))
            i = j
            continue
        if c in _OPS or c == ",":
            toks.append(("op", c, i))
            i += 1
            continue
        raise ExprLexError(f"unknown character {c!r}", i)
    toks.append(("end", "", n))
    return toks


# -- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.toks = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind == "op" and text == op:
            return self.next()
        raise ExprSyntaxError(f"expected {op!r}", off)

    def parse(self) -> ExprAst:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", off)
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = Binary(text, node, self.term())
            else:
                return node

    def term(self) -> ExprAst:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = Binary(text, node, self.unary())
            else:
                return node

    def unary(self) -> ExprAst:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> ExprAst:
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        sign = 1
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.next()
            sign = -1
            kind, text, off = self.peek()
        if kind != "num" or "." in text or "e" in text or "E" in text:
            raise ExprSyntaxError("exponent must be an integer literal", off)
        self.next()
        value = sign * int(text)
        if abs(value) > _MAX_EXPONENT:
            raise ExprSyntaxError(
                f"exponent {value} outside [-{_MAX_EXPONENT}, {_MAX_EXPONENT}]", off)
        return value

    def atom(self) -> ExprAst:
        kind, text, off = self.next()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text == "x1":
                return Var(1)
            if text == "x2":
                return Var(2)
            if text in _FUNCS:
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    k2, t2, o2 = self.peek()
                    if k2 == "op" and t2 == ",":
                        self.next()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != 1:
                    raise ExprArityError(
                        f"{text} takes 1 argument, got {len(args)}", off)
                return Unary(text, args[0])
            raise ExprSyntaxError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text or 'end of input'!r}", off)


def parse(source: str) -> ExprAst:
    """Parse UTF-8 text into an AST; raises ExprLexError / ExprSyntaxError."""
    return _Parser(source).parse()


# -- printer -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(node: ExprAst) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["neg"] if node.op == "neg" else _PREC["atom"]
    if isinstance(node, Pow):
        return _PREC["pow"]
    return _PREC["atom"]


def to_source(node: ExprAst) -> str:
    """Canonical printer; parse(to_source(parse(s))) == parse(s)."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_source(node.child)
            if _prec(node.child) <= _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({to_source(node.child)})"
    if isinstance(node, Pow):
        base = to_source(node.base)
        if _prec(node.base) < _PREC["atom"]:
            base = f"({base})"
        exp = str(node.exponent)
        return f"{base}^{exp}"
    if isinstance(node, Binary):
        left, right = to_source(node.left), to_source(node.right)
        if _prec(node.left) < _PREC[node.op]:
            left = f"({left})"
        # binaries are left-associative: right child needs parens at equal precedence
        if _prec(node.right) <= _PREC[node.op]:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation -----------------------------------------------------------------

def eval_jet(node: ExprAst, x) -> Jet3:
    """Evaluate ``node`` over jets seeded at ``x``; exact derivatives to order 3.

    ``x`` is a 2-vector, or a pair of equal-shape arrays for batch evaluation.
    Domain errors (division by a zero-valued jet, sqrt of a nonpositive value)
    propagate from jet arithmetic as JetDomainError.
    """
    j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
    return _eval(node, j1, j2)


def _eval(node: ExprAst, j1: Jet3, j2: Jet3) -> Jet3:
    if isinstance(node, Const):
        return jets.constant(node.value, like=j1)
    if isinstance(node, Var):
        return j1 if node.index == 1 else j2
    if isinstance(node, Unary):
        child = _eval(node.child, j1, j2)
        if node.op == "neg":
            return -child
        return getattr(jets, node.op)(child)
    if isinstance(node, Pow):
        return jets.pow_int(_eval(node.base, j1, j2), node.exponent)
    if isinstance(node, Binary):
        a = _eval(node.left, j1, j2)
        b = _eval(node.right, j1, j2)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    raise TypeError(f"not an expression node: {node!r}")
