"""Session language: declarations, equations in solved form, and expressions.

A session is a sequence of ``;``-terminated declarations::

    vars t, x;
    deps u;
    funcs b(u), c(u), m(u);
    params k;
    unknowns Q(t, x, u);
    let B = int(b, u);
    equation F = u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] + m(u) solve u[t,t];
    expr P = -u[t];

Expressions use ``+ - * / ^ **``, jet coordinates ``u[t,x]``, registered
functions ``b(e)`` with derivatives ``b'(e)``, ``exp(e)``, total
derivatives ``D[t](e)``, antiderivatives ``int(b, e)``, unknown-function
partials ``diff(Q(t,x,u), u, t)`` and tuples ``(e1, e2)``.  Decimals are
read as exact rationals.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import sympy as sp
from sympy.core.function import AppliedUndef

from .desystem import DESystem
from .errors import DSLSyntaxError, UnknownSymbol
from .expr import ArbitraryFunction, function_atom
from .jet import DEFAULT_MAX_ORDER, JetSpace

__all__ = ["Session", "parse_session", "parse_expression", "to_dsl", "Parser"]

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^()\[\],;='])
    """,
    re.VERBOSE,
)

KEYWORDS = {"vars", "deps", "funcs", "params", "unknowns", "let", "expr", "equation", "solve"}
RESERVED = KEYWORDS | {"exp", "D", "int", "diff"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind != "ws":
                tokens.append(Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class Session:
    """Everything a session source declares."""

    independent: list = field(default_factory=list)
    dependent: list = field(default_factory=list)
    functions: dict = field(default_factory=dict)
    parameters: list = field(default_factory=list)
    unknowns: dict = field(default_factory=dict)
    bindings: dict = field(default_factory=dict)
    equations: list = field(default_factory=list)
    max_order: int = DEFAULT_MAX_ORDER
    _jet: Optional[JetSpace] = None
    _system: Optional[DESystem] = None

    @property
    def jet(self) -> JetSpace:
        if self._jet is None:
            if not self.independent or not self.dependent:
                raise UnknownSymbol("no independent or dependent variables declared")
            self._jet = JetSpace(self.independent, self.dependent, self.functions, self.parameters, self.max_order)
        return self._jet

    @property
    def system(self) -> Optional[DESystem]:
        if self._system is None and self.equations:
            names = [n for n, _, _ in self.equations]
            eqs = [e for _, e, _ in self.equations]
            leads = [l for _, _, l in self.equations]
            self._system = DESystem(self.jet, eqs, leads, names)
        return self._system

    def parse(self, text: str):
        """Parse an expression (or tuple) against this session's declarations."""
        parser = Parser(tokenize(text), self)
        value = parser.expression_or_tuple()
        parser.expect("eof")
        return value


class Parser:
    def __init__(self, tokens: list, session: Session):
        self.tokens = tokens
        self.i = 0
        self.session = session

    # -- token helpers -----------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        where = f"'{tok.text}'" if tok.text else "end of input"
        raise DSLSyntaxError(f"{message}, found {where}", tok.line, tok.column)

    def accept(self, text: str) -> Optional[Token]:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        if text == "eof":
            if self.tok.kind != "eof":
                self.error("expected end of input")
            return self.tok
        t = self.accept(text)
        if t is None:
            self.error(f"expected '{text}'")
        return t

    def name(self) -> Token:
        if self.tok.kind != "name":
            self.error("expected a name")
        t = self.tok
        self.i += 1
        return t

    def names(self) -> list:
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return out

    # -- declarations --------------------------------------------------------------
    def session_decls(self):
        while self.tok.kind != "eof":
            self.declaration()

    def _new_name(self, tok: Token):
        s = self.session
        taken = set(s.independent) | set(s.dependent) | set(s.functions) | set(s.parameters) | set(s.unknowns) | set(s.bindings)
        if tok.text in taken:
            raise DSLSyntaxError(f"name '{tok.text}' is already declared", tok.line, tok.column)
        if tok.text in RESERVED:
            raise DSLSyntaxError(f"'{tok.text}' is a reserved word", tok.line, tok.column)
        return tok.text

    def _locked(self, tok: Token):
        if self.session._jet is not None:
            raise DSLSyntaxError("variables and functions must be declared before they are used", tok.line, tok.column)

    def declaration(self):
        s = self.session
        kw = self.tok
        if kw.kind != "name" or kw.text not in KEYWORDS - {"solve"}:
            self.error("expected a declaration keyword")
        self.i += 1
        if kw.text == "vars":
            self._locked(kw)
            s.independent.extend(self._new_name(t) for t in self.names())
        elif kw.text == "deps":
            self._locked(kw)
            s.dependent.extend(self._new_name(t) for t in self.names())
        elif kw.text == "params":
            self._locked(kw)
            s.parameters.extend(self._new_name(t) for t in self.names())
        elif kw.text == "funcs":
            self._locked(kw)
            while True:
                fname = self._new_name(self.name())
                self.expect("(")
                arg = self.name()
                self.expect(")")
                s.functions[fname] = arg.text
                if not self.accept(","):
                    break
        elif kw.text == "unknowns":
            while True:
                fname = self._new_name(self.name())
                self.expect("(")
                args = [self.primary_symbol()]
                while self.accept(","):
                    args.append(self.primary_symbol())
                self.expect(")")
                s.unknowns[fname] = tuple(args)
                if not self.accept(","):
                    break
        elif kw.text in ("let", "expr"):
            nm = self._new_name(self.name())
            self.expect("=")
            s.bindings[nm] = self.expression_or_tuple()
        elif kw.text == "equation":
            nm = self._new_name(self.name())
            self.expect("=")
            e = self.expression()
            self.expect("solve")
            lead_tok = self.tok
            lead = self.primary()
            if not s.jet.is_coordinate(lead):
                raise DSLSyntaxError("solve needs a jet coordinate", lead_tok.line, lead_tok.column)
            s.equations.append((nm, e, lead))
            s.bindings[nm] = e
            s._system = None
        self.expect(";")

    def primary_symbol(self):
        tok = self.tok
        e = self.primary()
        if not isinstance(e, sp.Symbol):
            raise DSLSyntaxError("unknown-function arguments must be variables or jet coordinates", tok.line, tok.column)
        return e

    # -- expressions -----------------------------------------------------------------
    def expression_or_tuple(self):
        if self.tok.text == "(":
            start = self.i
            self.i += 1
            first = self.expression()
            if self.accept(","):
                items = [first, self.expression()]
                while self.accept(","):
                    items.append(self.expression())
                self.expect(")")
                return tuple(items)
            self.i = start
        return self.expression()

    def expression(self):
        value = self.term()
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            if self.accept("*"):
                value = value * self.unary()
            elif self.accept("/"):
                tok = self.tok
                d = self.unary()
                if d == 0:
                    raise DSLSyntaxError("division by zero", tok.line, tok.column)
                value = value / d
            else:
                return value

    def unary(self):
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.accept("^") or self.accept("**"):
            return base ** self.unary()
        return base

    def _args(self) -> list:
        self.expect("(")
        args = [self.expression()]
        while self.accept(","):
            args.append(self.expression())
        self.expect(")")
        return args

    def _index_list(self) -> list:
        self.expect("[")
        out = []
        while True:
            t = self.tok
            if t.kind != "name":
                self.error("expected an independent variable")
            if t.text not in self.session.independent:
                raise UnknownSymbol(f"'{t.text}' is not an independent variable (line {t.line}, column {t.column})")
            out.append(t.text)
            self.i += 1
            if not self.accept(","):
                break
        self.expect("]")
        return out

    def primary(self):
        tok = self.tok
        s = self.session
        if tok.kind == "num":
            self.i += 1
            return sp.Rational(tok.text)
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        if tok.kind != "name":
            self.error("expected an expression")
        self.i += 1
        nm = tok.text
        if nm == "exp":
            (arg,) = self._one(self._args(), tok)
            return sp.exp(arg)
        if nm == "D":
            idx = self._index_list()
            (arg,) = self._one(self._args(), tok)
            return s.jet.D(arg, *idx)
        if nm == "int":
            self.expect("(")
            ftok = self.name()
            if ftok.text not in s.functions:
                raise UnknownSymbol(f"'{ftok.text}' is not a registered function (line {ftok.line}, column {ftok.column})")
            self.expect(",")
            arg = self.expression()
            self.expect(")")
            return function_atom(ftok.text, -1)(arg)
        if nm == "diff":
            args = self._args()
            target = args[0]
            if not isinstance(target, AppliedUndef) or isinstance(target, ArbitraryFunction):
                raise DSLSyntaxError("diff applies to an unknown function", tok.line, tok.column)
            for v in args[1:]:
                if not isinstance(v, sp.Symbol) or v not in target.args:
                    raise DSLSyntaxError(f"diff variable {v} is not an argument of {target}", tok.line, tok.column)
            return sp.diff(target, *args[1:]) if len(args) > 1 else target
        if nm in s.functions:
            order = 0
            while self.accept("'"):
                order += 1
            (arg,) = self._one(self._args(), tok)
            return function_atom(nm, order)(arg)
        if nm in s.unknowns:
            if self.tok.text != "(":
                return sp.Function(nm)(*s.unknowns[nm])
            args = self._args()
            if len(args) != len(s.unknowns[nm]):
                raise DSLSyntaxError(f"{nm} takes {len(s.unknowns[nm])} arguments", tok.line, tok.column)
            return sp.Function(nm)(*args)
        if nm in s.dependent:
            if self.tok.text == "[":
                idx = self._index_list()
                return s.jet.coord(nm, idx)
            return s.jet.u(nm)
        if nm in s.independent or nm in s.parameters:
            return sp.Symbol(nm)
        if nm in s.bindings:
            return s.bindings[nm]
        raise UnknownSymbol(f"unknown name '{nm}' (line {tok.line}, column {tok.column})")

    def _one(self, args, tok):
        if len(args) != 1:
            raise DSLSyntaxError("expected exactly one argument", tok.line, tok.column)
        return args


def parse_session(text: str, max_order: int = DEFAULT_MAX_ORDER) -> Session:
    session = Session(max_order=max_order)
    Parser(tokenize(text), session).session_decls()
    session.system  # validates solved forms
    return session


def parse_expression(text: str, session: Session):
    return session.parse(text)


# -- printing -------------------------------------------------------------------------

def to_dsl(e) -> str:
    """Print an expression (or tuple) so that :func:`parse_expression` reads it back."""
    if isinstance(e, (list, tuple)):
        return "(" + ", ".join(to_dsl(c) for c in e) + ")"
    return _print(sp.sympify(e))


def _atom_text(e) -> str:
    if isinstance(e, ArbitraryFunction):
        arg = _print(e.args[0])
        if e.order >= 0:
            return f"{e.base}{chr(39) * e.order}({arg})"
        if e.order == -1:
            return f"int({e.base}, {arg})"
        raise ValueError("only first antiderivatives have a printed form")
    if isinstance(e, sp.exp):
        return f"exp({_print(e.args[0])})"
    if isinstance(e, AppliedUndef):
        return f"{e.func.__name__}({', '.join(_print(a) for a in e.args)})"
    if isinstance(e, sp.Derivative):
        vs = []
        for v, k in e.variable_count:
            vs.extend([_print(v)] * int(k))
        return f"diff({_atom_text(e.expr)}, {', '.join(vs)})"
    if isinstance(e, sp.Symbol):
        return e.name
    raise ValueError(f"cannot print {e!r}")


def _print(e) -> str:
    if e.is_Integer:
        return str(e)
    if e.is_Rational:
        return f"{e.p}/{e.q}"
    if e.is_Add:
        terms = sorted(e.args, key=sp.default_sort_key)
        out = ""
        for k, t in enumerate(terms):
            text, negative = _signed(t)
            if k == 0:
                out = ("-" if negative else "") + text
            else:
                out += (" - " if negative else " + ") + text
        return out
    if e.is_Mul or e.is_Pow:
        text, negative = _signed(e)
        return ("-" if negative else "") + text
    return _atom_text(e)


def _signed(t):
    """``(text, negative)`` for a product, with the sign pulled out."""
    coeff, rest = t.as_coeff_Mul()
    negative = coeff < 0
    coeff = -coeff if negative else coeff
    factors = [] if rest == 1 else sorted(sp.Mul.make_args(rest), key=sp.default_sort_key)
    parts = []
    if coeff != 1 or not factors:
        parts.append(_print(coeff) if coeff.is_Integer else f"({_print(coeff)})")
    for f in factors:
        if f.is_Pow:
            base = _print(f.base)
            if not (f.base.is_Symbol or isinstance(f.base, (ArbitraryFunction, AppliedUndef, sp.exp, sp.Derivative))):
                base = f"({base})"
            exp = _print(f.exp)
            if not f.exp.is_Integer or f.exp < 0:
                exp = f"({exp})"
            parts.append(f"{base}^{exp}")
        elif f.is_Add:
            parts.append(f"({_print(f)})")
        else:
            parts.append(_print(f))
    return "*".join(parts), negative
