"""Exact expression kernel.

Expressions are plain sympy objects built from a small set of atoms:

* symbols for independent variables, jet coordinates and parameters,
* arbitrary univariate functions ``b(u)`` together with their derivatives
  ``b'(u), b''(u), ...`` and antiderivatives ``int(b, u)`` (order ``-1``),
* unknown functions ``Q(t, x, u)`` and their partial derivatives,
* exponentials of linear forms.

Coefficients are sympy rationals, so every zero test here is exact.  The
canonical form produced by :func:`normalize` is the expanded numerator over
the expanded denominator; exponentials are split into one factor per term
of their (linear) exponent, which makes ``exp(t)*exp(x) - exp(t + x)``
cancel.
"""

from __future__ import annotations

from functools import lru_cache

import sympy as sp
from sympy.core.function import AppliedUndef

from .errors import CyclicBinding, DepthExceeded, NotPolynomial

__all__ = [
    "ArbitraryFunction",
    "function_atom",
    "antiderivative_atom",
    "atom_kind",
    "normalize",
    "is_zero",
    "diff_partial",
    "substitute",
    "collect",
    "expression_depth",
]

DEFAULT_MAX_DEPTH = 400


class ArbitraryFunction(sp.Function):
    """A registered univariate function, differentiated ``order`` times.

    Negative orders are antiderivatives, so ``b`` at order ``-1`` is a
    symbol ``B`` with ``B' = b``.  Concrete classes come from
    :func:`function_atom`; never subclass this directly.
    """

    nargs = 1
    base = ""
    order = 0

    def fdiff(self, argindex=1):
        return function_atom(self.base, self.order + 1)(self.args[0])


def function_atom(name: str, order: int = 0) -> type:
    """Return the (unique) function class for ``name`` differentiated ``order`` times."""
    return _function_atom(str(name), int(order))


@lru_cache(maxsize=None)
def _function_atom(name: str, order: int) -> type:
    if order == 0:
        clsname = name
    elif order > 0:
        clsname = name + "'" * order
    else:
        clsname = f"int{-order}_{name}"
    return type(clsname, (ArbitraryFunction,), {"base": name, "order": order})


def antiderivative_atom(name: str) -> type:
    return function_atom(name, -1)


def atom_kind(a) -> str:
    """Classify an atom.

    Symbols are reported as ``"symbol"``; telling independent variables,
    jet coordinates and parameters apart needs a :class:`~jetcons.jet.JetSpace`.
    """
    if isinstance(a, sp.Symbol):
        return "symbol"
    if isinstance(a, ArbitraryFunction):
        return "arbitrary-function-derivative"
    if isinstance(a, AppliedUndef):
        return "unknown-function"
    if isinstance(a, sp.Derivative) and isinstance(a.expr, AppliedUndef):
        return "unknown-function-partial"
    if isinstance(a, sp.exp):
        return "exponential"
    raise TypeError(f"not an atom: {a!r}")


def expression_depth(e) -> int:
    depth = 0
    stack = [(e, 1)]
    while stack:
        node, d = stack.pop()
        if d > depth:
            depth = d
        stack.extend((arg, d + 1) for arg in node.args)
    return depth


def _has_denominator(e) -> bool:
    for p in e.atoms(sp.Pow):
        if p.exp.is_negative:
            return True
    return False


def normalize(e, max_depth: int = DEFAULT_MAX_DEPTH):
    """Canonical form: expanded numerator over expanded denominator."""
    e = sp.sympify(e)
    if e.is_Number:
        return e
    if expression_depth(e) > max_depth:
        raise DepthExceeded(f"expression nesting exceeds {max_depth}")
    if not _has_denominator(e):
        return sp.expand(e)
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    num = sp.expand(num)
    den = sp.expand(den)
    if num == 0:
        return sp.Integer(0)
    if den == 1:
        return num
    return num / den


def is_zero(e) -> bool:
    e = sp.sympify(e)
    if e.is_Number:
        return e == 0
    if not _has_denominator(e):
        return sp.expand(e) == 0
    num, _ = sp.fraction(sp.together(e))
    return sp.expand(num) == 0


def diff_partial(e, a):
    """Partial derivative of ``e`` with respect to the atom ``a``.

    Every other atom is held fixed; the chain rule reaches inside function
    arguments only where ``a`` actually occurs.
    """
    if isinstance(a, sp.exp):
        raise TypeError("cannot differentiate with respect to an exponential atom")
    return normalize(sp.diff(sp.sympify(e), a))


def substitute(e, bindings: dict):
    """Simultaneous substitution followed by normalization.

    Keys are symbols or applied unknown functions such as ``Q(t, x, u)``.
    Binding an unknown function also rewrites its partial-derivative atoms
    by differentiating the replacement.
    """
    e = sp.sympify(e)
    func_bindings = {}
    sym_bindings = {}
    for key, target in bindings.items():
        target = sp.sympify(target)
        if target.has(key):
            raise CyclicBinding(f"binding for {key} refers to itself")
        if isinstance(key, AppliedUndef):
            func_bindings[key] = target
        else:
            sym_bindings[key] = target
    if func_bindings:
        for key, target in func_bindings.items():
            e = e.replace(key.func, sp.Lambda(key.args, target))
        e = e.doit()
    if sym_bindings:
        for f in e.atoms(AppliedUndef):
            if set(f.args) & set(sym_bindings):
                raise ValueError(f"cannot substitute an argument of unknown function {f}")
        e = e.xreplace(sym_bindings)
    return normalize(e)


def collect(e, vars) -> dict:
    """Split ``e`` into ``{monomial: coefficient}`` over the atoms in ``vars``.

    Coefficients are free of ``vars`` and ``sum(m * c)`` reproduces ``e``.
    The constant monomial is the key ``1``.
    """
    vars = set(vars)
    num, den = sp.fraction(normalize(e))
    if vars and den.has(*vars):
        raise NotPolynomial("collection variable occurs in a denominator")
    out: dict = {}
    for term in sp.Add.make_args(sp.expand(num)):
        powers: dict = {}
        coeff = []
        for f in sp.Mul.make_args(term):
            if f in vars:
                powers[f] = powers.get(f, 0) + 1
            elif f.is_Pow and f.base in vars and f.exp.is_Integer and f.exp > 0:
                powers[f.base] = powers.get(f.base, 0) + int(f.exp)
            elif vars and f.has(*vars):
                raise NotPolynomial(f"{f} is not polynomial in the collection variables")
            else:
                coeff.append(f)
        mono = sp.Mul(*[v**k for v, k in powers.items()])
        out[mono] = out.get(mono, 0) + sp.Mul(*coeff)
    result = {}
    for mono in sorted(out, key=sp.default_sort_key):
        c = normalize(out[mono] / den)
        if c != 0:
            result[mono] = c
    return result
