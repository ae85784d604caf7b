"""Jet-space bookkeeping and total derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Optional, Sequence

import sympy as sp

from .errors import NotPointForm, OrderOverflow
from .expr import _has_denominator, normalize

DEFAULT_MAX_ORDER = 8


def multi_indices(n: int, order: int):
    """All count vectors of length ``n`` summing to ``order``, in a fixed order."""
    for combo in combinations_with_replacement(range(n), order):
        counts = [0] * n
        for i in combo:
            counts[i] += 1
        yield tuple(counts)


def add_index(counts: tuple, i: int, k: int = 1) -> tuple:
    c = list(counts)
    c[i] += k
    return tuple(c)


def index_sequence(counts: tuple) -> tuple:
    """Expand a count vector into the sorted sequence of variable indices."""
    seq = []
    for i, k in enumerate(counts):
        seq.extend([i] * k)
    return tuple(seq)


def _monomials(e) -> list:
    """``[(coefficient, ((atom, power), ...)), ...]`` for an expanded polynomial expression."""
    out = []
    for term in sp.Add.make_args(sp.expand(e)):
        if term == 0:
            continue
        coeff, factors = term.as_coeff_mul()
        mono = []
        for f in factors:
            if f.is_Pow and f.exp.is_Integer:
                mono.append((f.base, int(f.exp)))
            else:
                mono.append((f, 1))
        out.append((coeff, tuple(mono)))
    return out


class JetSpace:
    """Independent and dependent variables plus all derivative coordinates.

    Jet coordinates are sympy symbols named like ``u[t,x]``; the plain
    dependent variable is the symbol ``u``.  All coordinates up to
    ``max_order`` are created at construction, so instances never change.
    """

    def __init__(
        self,
        independent: Sequence[str],
        dependent: Sequence[str],
        functions: Optional[dict] = None,
        parameters: Sequence[str] = (),
        max_order: int = DEFAULT_MAX_ORDER,
    ):
        self.independent = tuple(independent)
        self.dependent = tuple(dependent)
        self.functions = dict(functions or {})
        self.parameters = tuple(parameters)
        self.max_order = int(max_order)
        names = self.independent + self.dependent + self.parameters + tuple(self.functions)
        if len(set(names)) != len(names):
            raise ValueError(f"names must be unique: {names}")
        if not self.independent or not self.dependent:
            raise ValueError("need at least one independent and one dependent variable")
        self.n = len(self.independent)
        self.m = len(self.dependent)
        self.x = tuple(sp.Symbol(name) for name in self.independent)
        self.params = tuple(sp.Symbol(name) for name in self.parameters)
        self._coords: dict = {}
        self._lookup: dict = {}
        for a, dep in enumerate(self.dependent):
            for order in range(self.max_order + 1):
                for counts in multi_indices(self.n, order):
                    sym = sp.Symbol(self._coord_name(dep, counts))
                    self._coords[(a, counts)] = sym
                    self._lookup[sym] = (a, counts)

    def _coord_name(self, dep: str, counts: tuple) -> str:
        if not any(counts):
            return dep
        letters = [self.independent[i] for i in index_sequence(counts)]
        return f"{dep}[{','.join(letters)}]"

    def __repr__(self):
        return (
            f"JetSpace(independent={self.independent}, dependent={self.dependent}, "
            f"parameters={self.parameters}, max_order={self.max_order})"
        )

    # -- coordinates -----------------------------------------------------
    def dep_index(self, dep) -> int:
        if isinstance(dep, int):
            return dep
        return self.dependent.index(str(dep))

    def var_index(self, var) -> int:
        if isinstance(var, int):
            return var
        return self.independent.index(str(var))

    def counts_of(self, seq) -> tuple:
        """Turn a sequence of variable names or indices into a count vector."""
        counts = [0] * self.n
        for v in seq:
            counts[self.var_index(v)] += 1
        return tuple(counts)

    def coord(self, dep=0, counts=()) -> sp.Symbol:
        """Jet coordinate for dependent variable ``dep`` and multi-index ``counts``.

        ``counts`` may be a count vector or a sequence of variable names,
        e.g. ``coord("u", "tx")``.
        """
        a = self.dep_index(dep)
        if isinstance(counts, str) or (counts and not isinstance(counts[0], int)):
            counts = self.counts_of(counts)
        elif len(counts) != self.n:
            counts = self.counts_of(counts)
        counts = tuple(counts)
        if sum(counts) > self.max_order:
            raise OrderOverflow(f"order {sum(counts)} exceeds max order {self.max_order}")
        return self._coords[(a, counts)]

    def u(self, dep=0):
        return self.coord(dep, (0,) * self.n)

    def lookup(self, sym):
        """``(dep index, counts)`` for a jet coordinate, else ``None``."""
        return self._lookup.get(sym)

    def is_coordinate(self, sym) -> bool:
        return sym in self._lookup

    def order_of(self, sym) -> int:
        return sum(self._lookup[sym][1])

    def coordinates_in(self, e) -> set:
        return {s for s in sp.sympify(e).free_symbols if s in self._lookup}

    def expression_order(self, e) -> int:
        coords = self.coordinates_in(e)
        return max((self.order_of(c) for c in coords), default=-1)

    def coordinates(self, dep=None, max_order=None):
        """All coordinates (optionally of one dependent variable) up to ``max_order``."""
        top = self.max_order if max_order is None else max_order
        out = []
        deps = range(self.m) if dep is None else [self.dep_index(dep)]
        for a in deps:
            for order in range(top + 1):
                for counts in multi_indices(self.n, order):
                    out.append(self._coords[(a, counts)])
        return out

    def raise_index(self, sym, i: int):
        a, counts = self._lookup[sym]
        if sum(counts) >= self.max_order:
            raise OrderOverflow(f"D_{self.independent[i]} of {sym} exceeds max order {self.max_order}")
        return self._coords[(a, add_index(counts, i))]

    def extend(self, dependent: Sequence[str]) -> "JetSpace":
        """A larger jet space with extra dependent variables appended."""
        return JetSpace(
            self.independent,
            self.dependent + tuple(dependent),
            self.functions,
            self.parameters,
            self.max_order,
        )

    def with_max_order(self, max_order: int) -> "JetSpace":
        return JetSpace(self.independent, self.dependent, self.functions, self.parameters, max_order)

    def fresh_name(self, stem: str) -> str:
        taken = set(self.independent + self.dependent + self.parameters + tuple(self.functions))
        if stem not in taken:
            return stem
        k = 1
        while f"{stem}{k}" in taken:
            k += 1
        return f"{stem}{k}"

    # -- total derivatives -------------------------------------------------
    def total_derivative(self, e, i):
        """``D_i e``: explicit ``x^i`` dependence plus the chain rule over all jet coordinates."""
        i = self.var_index(i)
        e = sp.sympify(e)
        if _has_denominator(e):
            return normalize(self._chain_rule(e, i))
        cache: dict = {}
        acc: dict = {}
        for term in sp.Add.make_args(sp.expand(e)):
            coeff, factors = term.as_coeff_mul()
            powers: dict = {}
            for f in factors:
                base, p = (f.base, int(f.exp)) if f.is_Pow and f.exp.is_Integer else (f, 1)
                powers[base] = powers.get(base, 0) + p
            for base, p in powers.items():
                if base not in cache:
                    cache[base] = _monomials(self._atom_derivative(base, i))
                for dc, dmono in cache[base]:
                    mono = dict(powers)
                    if p == 1:
                        del mono[base]
                    else:
                        mono[base] = p - 1
                    for a, q in dmono:
                        mono[a] = mono.get(a, 0) + q
                    key = frozenset(mono.items())
                    acc[key] = acc.get(key, 0) + coeff * p * dc
        return sp.Add(*[c * sp.Mul(*[a**q for a, q in key]) for key, c in acc.items() if c != 0])

    def _atom_derivative(self, a, i):
        if a in self._lookup:
            return self.raise_index(a, i)
        if a == self.x[i]:
            return sp.Integer(1)
        if a.is_Symbol or a.is_Number:
            return sp.Integer(0)
        return self._chain_rule(a, i)

    def _chain_rule(self, e, i):
        result = sp.diff(e, self.x[i])
        for c in sorted(self.coordinates_in(e), key=sp.default_sort_key):
            dc = sp.diff(e, c)
            if dc != 0:
                result += self.raise_index(c, i) * dc
        return result

    def iterated_total_derivative(self, e, counts):
        if isinstance(counts, str) or (counts and not isinstance(counts[0], int)):
            counts = self.counts_of(counts)
        for i in index_sequence(tuple(counts)):
            e = self.total_derivative(e, i)
        return normalize(e)

    def D(self, e, *vars):
        """Shorthand: ``jet.D(e, "t", "x")`` is ``D_t D_x e``."""
        for v in vars:
            e = self.total_derivative(e, v)
        return e

    def divergence(self, components):
        total = sp.Add(*[self.total_derivative(c, i) for i, c in enumerate(components)])
        # polynomial total derivatives come back expanded already
        return normalize(total) if _has_denominator(total) else total


@dataclass(frozen=True)
class GeneratorCharacteristic:
    """Characteristic ``P`` of a generator, with the point form kept when known."""

    P: tuple
    xi: Optional[tuple] = None
    eta: Optional[tuple] = None
    names: tuple = field(default=(), compare=False)

    @property
    def is_point(self) -> bool:
        return self.xi is not None


def characteristic_from_point_symmetry(jet: JetSpace, xi, eta) -> GeneratorCharacteristic:
    """``P^a = eta^a - xi^i u^a_i`` for a point generator ``xi^i d_i + eta^a d_{u^a}``."""
    xi = tuple(normalize(c) for c in xi)
    eta = tuple(normalize(c) for c in eta)
    if len(xi) != jet.n or len(eta) != jet.m:
        raise ValueError("xi needs one entry per independent variable, eta one per dependent variable")
    for c in xi + eta:
        if jet.expression_order(c) >= 1:
            raise NotPointForm(f"{c} depends on derivatives of the dependent variables")
    P = []
    for a in range(jet.m):
        val = eta[a]
        for i in range(jet.n):
            val -= xi[i] * jet.coord(a, add_index((0,) * jet.n, i))
        P.append(normalize(val))
    return GeneratorCharacteristic(tuple(P), xi, eta)
