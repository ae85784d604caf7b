"""DE systems in solved form, on-shell reduction and off-shell decomposition.

Each equation ``F_a`` is linear in a declared leading coordinate with a
nonzero rational coefficient ``k_a``, so ``F_a = k_a (lead_a - solved_a)``.
Reduction replaces leading coordinates and their descendants by the solved
form and its total derivatives.

Off-shell decomposition uses slack variables: every leading descendant
``lead_a + K`` is replaced by ``D_K(solved_a) + s_{a,K} / k_a`` (recursively
reduced), under which ``D_K F_a`` becomes exactly ``s_{a,K}``.  Collecting in
the slack coordinates then reads off the operator coefficients.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import sympy as sp

from .errors import (
    LeadingDerivativeInvalid,
    NonTerminating,
    ShapeMismatch,
    SingularOnShell,
)
from .expr import collect, is_zero, normalize
from .jet import JetSpace, index_sequence, multi_indices
from .variational import _Derivatives, green_current

__all__ = [
    "DESystem",
    "LinearDiffOperator",
    "Decomposition",
    "reduce_on_shell",
    "decompose_off_shell",
    "adjoint_operator",
    "apply_operator",
]


def _sub_counts(big: tuple, small: tuple) -> Optional[tuple]:
    diff = tuple(b - s for b, s in zip(big, small))
    return diff if all(d >= 0 for d in diff) else None


class _Reducer:
    """Replace leading descendants by differentiated solved forms, memoized."""

    def __init__(self, jet: JetSpace, leads: list, solved: list):
        self.jet = jet
        self.leads = leads  # (dep index, counts) per equation
        self.solved = solved
        self._memo: dict = {}
        self._busy: set = set()
        self._lock = threading.RLock()

    def owner(self, sym):
        """``(equation, K)`` when ``sym`` is ``lead + K``, else ``None``."""
        info = self.jet.lookup(sym)
        if info is None:
            return None
        a, counts = info
        for eq, (b, lc) in enumerate(self.leads):
            if a == b:
                rest = _sub_counts(counts, lc)
                if rest is not None:
                    return eq, rest
        return None

    def replacement(self, sym):
        with self._lock:
            if sym in self._memo:
                return self._memo[sym]
            if sym in self._busy:
                raise NonTerminating(f"solved forms feed back into {sym}")
            self._busy.add(sym)
            try:
                eq, rest = self.owner(sym)
                if not any(rest):
                    value = self.reduce(self.solved[eq])
                else:
                    i = next(k for k, c in enumerate(rest) if c)
                    a, counts = self.jet.lookup(sym)
                    parent = self.jet.coord(a, tuple(c - (1 if k == i else 0) for k, c in enumerate(counts)))
                    value = self.reduce(self.jet.total_derivative(self.replacement(parent), i))
            finally:
                self._busy.discard(sym)
            self._memo[sym] = value
            return value

    def reduce(self, e):
        e = sp.sympify(e)
        targets = [c for c in self.jet.coordinates_in(e) if self.owner(c) is not None]
        if not targets:
            return normalize(e)
        subs = {c: self.replacement(c) for c in sorted(targets, key=sp.default_sort_key)}
        return normalize(e.xreplace(subs))


class DESystem:
    """Equations ``F_a`` together with their leading coordinates.

    ``leading`` entries are jet coordinates of ``jet``.  Each ``F_a`` must be
    linear in its leading coordinate with a nonzero rational coefficient and
    free of that coordinate's other descendants.
    """

    def __init__(self, jet: JetSpace, equations: Sequence, leading: Sequence, names: Sequence[str] = ()):
        self.jet = jet
        self.equations = tuple(normalize(F) for F in equations)
        self.leading = tuple(leading)
        self.names = tuple(names) or tuple(f"F{k + 1}" for k in range(len(self.equations)))
        if len(self.leading) != len(self.equations):
            raise ShapeMismatch("one leading coordinate per equation is required")
        if len(set(self.leading)) != len(self.leading):
            raise LeadingDerivativeInvalid("leading coordinates must be distinct")
        self.scales = []
        solved = []
        leads = []
        for F, lead in zip(self.equations, self.leading):
            info = jet.lookup(lead)
            if info is None:
                raise LeadingDerivativeInvalid(f"{lead} is not a jet coordinate")
            a, lc = info
            k = normalize(sp.diff(F, lead))
            if not k.is_Rational or k == 0:
                raise LeadingDerivativeInvalid(f"{F} is not linear in {lead} with a nonzero constant coefficient")
            rest = normalize(F - k * lead)
            for c in jet.coordinates_in(rest):
                b, counts = jet.lookup(c)
                if b == a and _sub_counts(counts, lc) is not None:
                    raise LeadingDerivativeInvalid(f"{F} involves {c}, a descendant of the leading coordinate {lead}")
            self.scales.append(k)
            solved.append(normalize(-rest / k))
            leads.append(info)
        self.scales = tuple(self.scales)
        self.solved = tuple(solved)
        self._reducer = _Reducer(jet, leads, list(solved))
        slack_names = []
        for k in range(len(self.equations)):
            stem = "s" if len(self.equations) == 1 else f"s{k + 1}"
            taken = jet.fresh_name(stem)
            while taken in slack_names:
                taken = taken + "_"
            slack_names.append(taken)
        self.slack_jet = jet.extend(slack_names)
        slack_solved = [
            solved[k] + self.slack_jet.u(jet.m + k) / self.scales[k] for k in range(len(self.equations))
        ]
        self._slacker = _Reducer(self.slack_jet, leads, slack_solved)

    @property
    def M(self) -> int:
        return len(self.equations)

    def __repr__(self):
        eqs = ", ".join(f"{n}: {F}" for n, F in zip(self.names, self.equations))
        return f"DESystem({eqs})"

    def is_leading_descendant(self, sym) -> bool:
        return self._reducer.owner(sym) is not None

    def reduce(self, e):
        return self._reducer.reduce(e)

    def slack_coordinate(self, a: int, counts: tuple):
        return self.slack_jet.coord(self.jet.m + a, counts)

    def slack_info(self, sym):
        """``(equation, counts)`` for a slack coordinate, else ``None``."""
        info = self.slack_jet.lookup(sym)
        if info is None or info[0] < self.jet.m:
            return None
        return info[0] - self.jet.m, info[1]

    def slackify(self, e):
        return self._slacker.reduce(e)

    def equation_derivative(self, a: int, counts: tuple):
        return self.jet.iterated_total_derivative(self.equations[a], counts)

    def with_jet(self, jet: JetSpace) -> "DESystem":
        """The same equations over a larger jet space (e.g. with extra dependent variables)."""
        leading = [jet.coord(self.jet.dependent[a], counts) for a, counts in (self.jet.lookup(l) for l in self.leading)]
        return DESystem(jet, self.equations, leading, self.names)


def reduce_on_shell(e, sys: DESystem):
    """Eliminate leading coordinates and their descendants from ``e``."""
    return sys.reduce(e)


@dataclass
class LinearDiffOperator:
    """``R(w)_row = sum over col, K of terms[(row, col)][K] * D_K w_col``."""

    jet: JetSpace
    rows: int
    cols: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key in sorted(self.terms):
            block = {}
            for counts, c in sorted(self.terms[key].items()):
                c = normalize(c)
                if c != 0:
                    block[tuple(counts)] = c
            if block:
                clean[key] = block
        self.terms = clean

    @classmethod
    def zero(cls, jet: JetSpace, rows: int, cols: int) -> "LinearDiffOperator":
        return cls(jet, rows, cols, {})

    @classmethod
    def multiplication(cls, jet: JetSpace, matrix) -> "LinearDiffOperator":
        """Zeroth-order operator from a nested list ``matrix[row][col]``."""
        rows = len(matrix)
        cols = len(matrix[0]) if rows else 0
        zero = (0,) * jet.n
        terms = {(r, c): {zero: matrix[r][c]} for r in range(rows) for c in range(cols)}
        return cls(jet, rows, cols, terms)

    @classmethod
    def derivative(cls, jet: JetSpace, var, coeff=1) -> "LinearDiffOperator":
        """Scalar operator ``coeff * D_var``."""
        counts = [0] * jet.n
        counts[jet.var_index(var)] = 1
        return cls(jet, 1, 1, {(0, 0): {tuple(counts): coeff}})

    def coefficient(self, row: int, col: int, counts=None):
        if counts is None:
            counts = (0,) * self.jet.n
        elif isinstance(counts, str) or (counts and not isinstance(counts[0], int)):
            counts = self.jet.counts_of(counts)
        return self.terms.get((row, col), {}).get(tuple(counts), sp.Integer(0))

    @property
    def order(self) -> int:
        return max((sum(k) for block in self.terms.values() for k in block), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def apply(self, w) -> list:
        w = list(w) if isinstance(w, (list, tuple)) else [w]
        if len(w) != self.cols:
            raise ShapeMismatch(f"operator takes {self.cols} components, got {len(w)}")
        derivs = [_Derivatives(self.jet, wc) for wc in w]
        out = [sp.Integer(0)] * self.rows
        for (r, c), block in self.terms.items():
            for counts, coeff in block.items():
                out[r] += coeff * derivs[c](index_sequence(counts))
        return [normalize(e) for e in out]

    def adjoint(self) -> "LinearDiffOperator":
        """Formal adjoint, ``(R*)_{col,row}^J = sum_{K>=J} (-1)^|K| binom(K,J) D_{K-J} R_{row,col}^K``."""
        terms: dict = {}
        for (r, c), block in self.terms.items():
            target = terms.setdefault((c, r), {})
            for K, coeff in block.items():
                dcoeff = _Derivatives(self.jet, coeff)
                for order in range(sum(K) + 1):
                    for J in multi_indices(self.jet.n, order):
                        rest = _sub_counts(K, J)
                        if rest is None:
                            continue
                        weight = 1
                        for k, j in zip(K, J):
                            weight *= comb(k, j)
                        term = weight * dcoeff(index_sequence(rest))
                        if sum(K) % 2:
                            term = -term
                        target[J] = target.get(J, 0) + term
        return LinearDiffOperator(self.jet, self.cols, self.rows, terms)

    def boundary_current(self, v, w) -> tuple:
        """``Theta`` with ``v.R(w) - w.R*(v) = D_i Theta^i`` exactly."""
        v = list(v) if isinstance(v, (list, tuple)) else [v]
        w = list(w) if isinstance(w, (list, tuple)) else [w]
        dws = [_Derivatives(self.jet, wc) for wc in w]
        comps = [sp.Integer(0)] * self.jet.n
        for (r, c), block in self.terms.items():
            for counts, coeff in block.items():
                if not any(counts):
                    continue
                for i, term in enumerate(green_current(v[r] * coeff, w[c], counts, self.jet, dw=dws[c])):
                    comps[i] += term
        return tuple(normalize(e) for e in comps)

    def equals(self, other: "LinearDiffOperator") -> bool:
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        keys = set(self.terms) | set(other.terms)
        for key in keys:
            a = self.terms.get(key, {})
            b = other.terms.get(key, {})
            for counts in set(a) | set(b):
                if not is_zero(a.get(counts, 0) - b.get(counts, 0)):
                    return False
        return True

    def map_coefficients(self, fn) -> "LinearDiffOperator":
        terms = {key: {k: fn(c) for k, c in block.items()} for key, block in self.terms.items()}
        return LinearDiffOperator(self.jet, self.rows, self.cols, terms)

    def __add__(self, other: "LinearDiffOperator") -> "LinearDiffOperator":
        terms = {key: dict(block) for key, block in self.terms.items()}
        for key, block in other.terms.items():
            target = terms.setdefault(key, {})
            for k, c in block.items():
                target[k] = target.get(k, 0) + c
        return LinearDiffOperator(self.jet, self.rows, self.cols, terms)

    def __neg__(self) -> "LinearDiffOperator":
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other: "LinearDiffOperator") -> "LinearDiffOperator":
        return self + (-other)

    def describe(self) -> str:
        """Readable form such as ``-D[t]`` or ``Q_u``; blocks separated by ``;``."""
        if not self.terms:
            return "0"
        parts = []
        for (r, c), block in self.terms.items():
            pieces = []
            for counts, coeff in block.items():
                if not any(counts):
                    pieces.append(f"({coeff})")
                else:
                    letters = ",".join(self.jet.independent[i] for i in index_sequence(counts))
                    pieces.append(f"({coeff})*D[{letters}]")
            body = " + ".join(pieces)
            parts.append(body if self.rows == self.cols == 1 else f"[{r},{c}]: {body}")
        return "; ".join(parts)

    def to_dict(self) -> dict:
        """Deterministic plain-data form: ``{"row,col": {"t,x": "coeff"}}``."""
        out = {}
        for (r, c), block in self.terms.items():
            out[f"{r},{c}"] = {
                ",".join(self.jet.independent[i] for i in index_sequence(k)) or "1": str(v) for k, v in block.items()
            }
        return out


def adjoint_operator(R: LinearDiffOperator) -> LinearDiffOperator:
    return R.adjoint()


def apply_operator(R: LinearDiffOperator, g) -> list:
    return R.apply(g)


@dataclass
class Decomposition:
    """``e = residual + R(F)``; ``linear`` is False when slack terms of degree >= 2 occurred."""

    residual: list
    operator: LinearDiffOperator
    linear: bool = True


def _slack_rank(sys: DESystem, sym):
    a, counts = sys.slack_info(sym)
    return (sum(counts), counts, a)


def decompose_off_shell(e, sys: DESystem) -> Decomposition:
    """Split ``e`` (or a list of expressions) into on-shell residual plus operator part."""
    es = list(e) if isinstance(e, (list, tuple)) else [e]
    jet = sys.jet
    residual = []
    terms: dict = {}
    linear = True
    back = {}
    for r, er in enumerate(es):
        slacked = sys.slackify(er)
        slacks = [c for c in sys.slack_jet.coordinates_in(slacked) if sys.slack_info(c) is not None]
        parts = collect(slacked, slacks)
        res = sp.Integer(0)
        for mono, coeff in parts.items():
            if mono == 1:
                res += coeff
                continue
            factors = []
            for base, power in sp.Mul(mono).as_powers_dict().items():
                factors.extend([base] * int(power))
            top = max(factors, key=lambda s: _slack_rank(sys, s))
            others = list(factors)
            others.remove(top)
            if others:
                linear = False
                for s in others:
                    if s not in back:
                        a, counts = sys.slack_info(s)
                        back[s] = sys.equation_derivative(a, counts)
                coeff = coeff * sp.Mul(*[back[s] for s in others])
            a, counts = sys.slack_info(top)
            block = terms.setdefault((r, a), {})
            block[counts] = block.get(counts, 0) + coeff
        residual.append(normalize(res))
    op = LinearDiffOperator(jet, len(es), sys.M, terms)
    return Decomposition(residual, op, linear)


def check_nonsingular(expr, sys: DESystem, what: str = "expression"):
    """Raise :class:`SingularOnShell` if the denominator of ``expr`` vanishes on shell."""
    _, den = sp.fraction(normalize(expr))
    if den != 1 and is_zero(sys.reduce(den)):
        raise SingularOnShell(f"{what} has a denominator vanishing on the solution space")
