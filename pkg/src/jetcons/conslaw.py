"""Symmetries, adjoint-symmetries, multipliers and conserved currents.

Operator conventions: ``R_P`` has one row per equation and one column per
equation (``delta_P F = R_P(F)``); ``R_Q`` has one row per dependent
variable (``delta*_Q F = R_Q(F)``).  The pair multiplier is then
``R_P*(Q) - R_Q*(P)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import sympy as sp
from sympy.core.function import AppliedUndef

from .desystem import DESystem, LinearDiffOperator, check_nonsingular, decompose_off_shell
from .errors import (
    IntegrationIncomplete,
    NotAnAdjointSymmetry,
    NotASymmetry,
    NotConserved,
    ShapeMismatch,
)
from .expr import ArbitraryFunction, collect, function_atom, is_zero, normalize
from .jet import JetSpace, multi_indices
from .variational import adjoint_frechet, frechet, higher_euler, pair_boundary_current, euler

__all__ = [
    "Multiplier",
    "ConservedCurrent",
    "DeterminingSystem",
    "MultiplierResiduals",
    "symmetry_residual",
    "adjoint_symmetry_residual",
    "extract_symmetry_operator",
    "extract_adjsymmetry_operator",
    "pair_conserved_current",
    "pair_multiplier",
    "is_trivial_pair",
    "multiplier_residuals",
    "multiplier_from_current",
    "symmetry_apply_to_current",
    "generate_determining_system",
    "integrate_characteristic",
    "reduces_modulo",
    "mutually_reducible",
]


def _vec(f) -> tuple:
    if isinstance(f, (list, tuple)):
        return tuple(normalize(c) for c in f)
    return (normalize(f),)


@dataclass(frozen=True)
class Multiplier:
    Q: tuple
    order: int = 0
    provenance: str = "given"

    def is_zero(self) -> bool:
        return all(is_zero(q) for q in self.Q)


@dataclass(frozen=True)
class ConservedCurrent:
    components: tuple
    verified: Optional[bool] = None
    multiplier: Optional[tuple] = None

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]


@dataclass
class DeterminingSystem:
    """Split determining equations for an unknown-function ansatz."""

    equations: list
    unknowns: tuple
    signature: tuple
    mode: str

    def __len__(self):
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)


@dataclass
class MultiplierResiduals:
    """On-shell adjoint-symmetry residuals plus Helmholtz-type conditions.

    ``helmholtz`` maps ``(alpha, a, counts)`` to the on-shell value of
    ``R_Q[alpha, a]^J + (-1)^|J| E^J_{u^alpha}(Q^a)``.
    """

    adjoint_symmetry: list
    helmholtz: dict = field(default_factory=dict)

    def conditions(self) -> list:
        return list(self.adjoint_symmetry) + list(self.helmholtz.values())

    def all_zero(self) -> bool:
        return all(is_zero(c) for c in self.conditions())


# -- residuals and operators -------------------------------------------------

def symmetry_residual(P, sys: DESystem) -> list:
    """``(delta_P F)|_shell``; all zero exactly when ``P`` is a symmetry."""
    return [sys.reduce(e) for e in frechet(sys.equations, _vec(P), sys.jet)]


def adjoint_symmetry_residual(Q, sys: DESystem) -> list:
    """``(delta*_Q F)|_shell``; all zero exactly when ``Q`` is an adjoint-symmetry."""
    Q = _vec(Q)
    if len(Q) != sys.M:
        raise ShapeMismatch(f"adjoint-symmetry needs {sys.M} components, got {len(Q)}")
    return [sys.reduce(e) for e in adjoint_frechet(sys.equations, Q, sys.jet)]


def extract_symmetry_operator(P, sys: DESystem) -> LinearDiffOperator:
    """``R_P`` with ``delta_P F = R_P(F)`` identically."""
    dec = decompose_off_shell(frechet(sys.equations, _vec(P), sys.jet), sys)
    if not all(is_zero(r) for r in dec.residual):
        raise NotASymmetry(f"{P} does not satisfy the symmetry determining equation")
    return dec.operator


def extract_adjsymmetry_operator(Q, sys: DESystem) -> LinearDiffOperator:
    """``R_Q`` with ``delta*_Q F = R_Q(F)`` identically."""
    Q = _vec(Q)
    if len(Q) != sys.M:
        raise ShapeMismatch(f"adjoint-symmetry needs {sys.M} components, got {len(Q)}")
    dec = decompose_off_shell(adjoint_frechet(sys.equations, Q, sys.jet), sys)
    if not all(is_zero(r) for r in dec.residual):
        raise NotAnAdjointSymmetry(f"{Q} does not satisfy the adjoint-symmetry determining equation")
    return dec.operator


def _divergence_on_shell(C, sys: DESystem):
    return sys.reduce(sys.jet.divergence(C))


def pair_conserved_current(P, Q, sys: DESystem) -> ConservedCurrent:
    """Boundary current of ``Q.delta_P F - P.delta*_Q F``, checked to be conserved."""
    P, Q = _vec(P), _vec(Q)
    extract_symmetry_operator(P, sys)
    extract_adjsymmetry_operator(Q, sys)
    psi = pair_boundary_current(sys.equations, P, Q, sys.jet)
    verified = is_zero(_divergence_on_shell(psi, sys))
    return ConservedCurrent(psi, verified, tuple(pair_multiplier(P, Q, sys).Q))


def pair_multiplier(P, Q, sys: DESystem) -> Multiplier:
    """``R_P*(Q) - R_Q*(P)``, the multiplier of the pair current."""
    P, Q = _vec(P), _vec(Q)
    RP = extract_symmetry_operator(P, sys)
    RQ = extract_adjsymmetry_operator(Q, sys)
    first = RP.adjoint().apply(list(Q))
    second = RQ.adjoint().apply(list(P))
    values = tuple(normalize(a - b) for a, b in zip(first, second))
    order = max((sys.jet.expression_order(v) for v in values), default=0)
    return Multiplier(values, max(order, 0), "pair-formula")


def is_trivial_pair(P, Q, sys: DESystem) -> bool:
    """True when the pair multiplier vanishes on the solution space."""
    return all(is_zero(sys.reduce(q)) for q in pair_multiplier(P, Q, sys).Q)


# -- multipliers ---------------------------------------------------------------

def multiplier_residuals(Q, sys: DESystem) -> MultiplierResiduals:
    """Adjoint-symmetry residual and Helmholtz-type conditions for a candidate multiplier."""
    Q = _vec(Q)
    if len(Q) != sys.M:
        raise ShapeMismatch(f"multiplier needs {sys.M} components, got {len(Q)}")
    for q in Q:
        check_nonsingular(q, sys, "multiplier")
    jet = sys.jet
    dec = decompose_off_shell(adjoint_frechet(sys.equations, Q, jet), sys)
    top = max([jet.expression_order(q) for q in Q] + [dec.operator.order, 0])
    helm = {}
    for alpha in range(jet.m):
        for a in range(sys.M):
            for order in range(top + 1):
                for J in multi_indices(jet.n, order):
                    coeff = dec.operator.coefficient(alpha, a, J)
                    if order == 0:
                        ej = euler(Q[a], alpha, jet)
                    else:
                        ej = higher_euler(Q[a], alpha, J, jet)
                    value = coeff + (ej if order % 2 == 0 else -ej)
                    helm[(alpha, a, J)] = sys.reduce(value)
    return MultiplierResiduals(list(dec.residual), helm)


def multiplier_from_current(C, sys: DESystem) -> Multiplier:
    """Multiplier ``Q`` with ``D_i C^i = Q.F`` up to terms vanishing on shell.

    ``D_i C^i`` is decomposed as ``R_C(F)`` and integrated by parts, so
    ``Q = R_C*(1)`` reduced on shell.
    """
    C = _vec(C)
    if len(C) != sys.jet.n:
        raise ShapeMismatch(f"current needs {sys.jet.n} components, got {len(C)}")
    dec = decompose_off_shell(sys.jet.divergence(C), sys)
    if not is_zero(dec.residual[0]):
        raise NotConserved("the divergence of the current does not vanish on the solution space")
    Q = tuple(sys.reduce(q) for q in dec.operator.adjoint().apply([1]))
    order = max((sys.jet.expression_order(q) for q in Q), default=0)
    return Multiplier(Q, max(order, 0), "extracted-from-current")


def symmetry_apply_to_current(P, C, jet: JetSpace) -> tuple:
    """Component-wise action ``delta_P C^i``."""
    return tuple(frechet(_vec(C), _vec(P), jet))


# -- determining systems -------------------------------------------------------

def _ansatz(sys: DESystem, signature: Sequence, name: str) -> tuple:
    jet = sys.jet
    args = []
    for a in signature:
        a = sp.sympify(a) if not isinstance(a, sp.Basic) else a
        if jet.is_coordinate(a) and sys.is_leading_descendant(a):
            raise ValueError(f"ansatz argument {a} is eliminated by the solved form")
        args.append(a)
    names = [name] if sys.M == 1 else [f"{name}{k + 1}" for k in range(sys.M)]
    return tuple(sp.Function(n)(*args) for n in names), tuple(args)


def _split(e, jet: JetSpace, keep: set) -> list:
    splitters = sorted((c for c in jet.coordinates_in(e) if c not in keep), key=sp.default_sort_key)
    if not splitters:
        return [normalize(e)] if not is_zero(e) else []
    return [c for c in collect(e, splitters).values()]


def _dedupe(eqs: list) -> list:
    out = []
    for e in eqs:
        if is_zero(e):
            continue
        if any(is_zero(e - f) or is_zero(e + f) for f in out):
            continue
        out.append(e)
    return out


def generate_determining_system(signature: Sequence, sys: DESystem, mode: str = "adjoint-symmetry", name: str = "Q") -> DeterminingSystem:
    """Split the determining equation of an ansatz ``Q(signature)``.

    The on-shell residual is collected over every jet coordinate that is not
    an ansatz argument; arbitrary-function atoms are never split over.  In
    ``multiplier`` mode the Helmholtz-type conditions are split the same way
    and appended.
    """
    if mode not in ("adjoint-symmetry", "multiplier"):
        raise ValueError(f"unknown mode {mode!r}")
    Q, args = _ansatz(sys, signature, name)
    keep = set(args)
    eqs = []
    if mode == "adjoint-symmetry":
        for r in adjoint_symmetry_residual(Q, sys):
            eqs.extend(_split(r, sys.jet, keep))
    else:
        res = multiplier_residuals(Q, sys)
        for r in res.adjoint_symmetry:
            eqs.extend(_split(r, sys.jet, keep))
        for r in res.helmholtz.values():
            eqs.extend(_split(r, sys.jet, keep))
    return DeterminingSystem(_dedupe(eqs), Q, args, mode)


def _unknown_atoms(e) -> set:
    atoms = set()
    for d in e.atoms(sp.Derivative):
        if isinstance(d.expr, AppliedUndef):
            atoms.add(d)
    for f in e.atoms(AppliedUndef):
        if not isinstance(f, ArbitraryFunction):
            atoms.add(f)
    return atoms


def _row(e, atoms: list) -> dict:
    parts = collect(e, atoms)
    if any(m != 1 and m not in atoms for m in parts):
        raise ValueError(f"{e} is not linear in the unknown-function atoms")
    return parts


def _echelon(rows: list) -> list:
    """Row-reduce dict rows; returns ``[(pivot, row)]`` with the pivot coefficient 1."""
    basis: list = []
    for row in rows:
        row = _eliminate(row, basis)
        pivot = next((k for k in sorted(row, key=sp.default_sort_key) if not is_zero(row[k])), None)
        if pivot is None:
            continue
        scale = row[pivot]
        row = {k: normalize(v / scale) for k, v in row.items()}
        basis.append((pivot, row))
    return basis


def _eliminate(row: dict, basis: list) -> dict:
    row = dict(row)
    for pivot, brow in basis:
        c = row.get(pivot, 0)
        if is_zero(c):
            continue
        for k, v in brow.items():
            row[k] = normalize(row.get(k, 0) - c * v)
    return {k: v for k, v in row.items() if not is_zero(v)}


def reduces_modulo(targets: Sequence, basis: Sequence) -> list:
    """Remainders of ``targets`` after elimination against ``basis``.

    Equations are treated as linear forms in the unknown-function atoms with
    coefficients in everything else, eliminated with generic pivots (a
    pivot that vanishes only for special arbitrary functions is still
    accepted).  Empty remainders mean each target is a combination of the
    basis equations.
    """
    atoms = sorted(set().union(*[_unknown_atoms(sp.sympify(e)) for e in list(targets) + list(basis)]), key=sp.default_sort_key)
    ech = _echelon([_row(normalize(e), atoms) for e in basis])
    out = []
    for t in targets:
        rem = _eliminate(_row(normalize(t), atoms), ech)
        out.append(normalize(sp.Add(*[k * v for k, v in rem.items()])))
    return out


def mutually_reducible(a: Sequence, b: Sequence) -> bool:
    return all(is_zero(r) for r in reduces_modulo(a, b)) and all(is_zero(r) for r in reduces_modulo(b, a))


# -- direct integration --------------------------------------------------------

def _antiderivative(c, y):
    """``G`` with ``dG/dy = c`` for terms ``y^k * f^(r)(y)``; ``None`` if out of reach."""
    total = sp.Integer(0)
    for term in sp.Add.make_args(sp.expand(c)):
        free, dep = [], []
        for f in sp.Mul.make_args(term):
            (dep if f.has(y) else free).append(f)
        k = 0
        funcs = []
        for f in dep:
            if f == y:
                k += 1
            elif f.is_Pow and f.base == y and f.exp.is_Integer and f.exp > 0:
                k += int(f.exp)
            elif isinstance(f, ArbitraryFunction) and f.args[0] == y:
                funcs.append(f)
            elif f.is_Pow and isinstance(f.base, ArbitraryFunction) and f.base.args[0] == y and f.exp == 1:
                funcs.append(f.base)
            else:
                return None
        if len(funcs) > 1:
            return None
        piece = _power_times_function(k, funcs[0] if funcs else None, y)
        total += sp.Mul(*free) * piece
    return normalize(total)


def _power_times_function(k: int, f, y):
    if f is None:
        return y ** (k + 1) / (k + 1)
    lower = function_atom(f.base, f.order - 1)(y)
    if k == 0:
        return lower
    # integration by parts: int y^k f = y^k F - k int y^(k-1) F
    return y**k * lower - k * _power_times_function(k - 1, lower, y)


def integrate_characteristic(Q, sys: DESystem, max_steps: int = 200) -> ConservedCurrent:
    """Current ``C`` with ``D_i C^i = Q F`` exactly, by repeated integration by parts.

    The highest-ranked coordinate ``u_K`` (order first, then ``t`` before
    ``x``) is integrated along the first variable it carries; its coefficient
    must be free of coordinates of the same or higher order.
    """
    jet = sys.jet
    if jet.m != 1 or sys.M != 1:
        raise ShapeMismatch("direct integration handles scalar equations only")
    Q = _vec(Q)
    target = normalize(Q[0] * sys.equations[0])
    E = target
    comps = [sp.Integer(0)] * jet.n

    def rank(c):
        counts = jet.lookup(c)[1]
        return (sum(counts), counts)

    for _ in range(max_steps):
        if is_zero(E):
            break
        coords = [c for c in jet.coordinates_in(E) if jet.order_of(c) >= 1]
        if not coords:
            if jet.coordinates_in(E) or E.atoms(ArbitraryFunction) or _unknown_atoms(E):
                raise IntegrationIncomplete(f"leftover {E} is not a total derivative of known form")
            G = sp.integrate(E, jet.x[0])
            comps[0] += G
            E = normalize(E - sp.diff(G, jet.x[0]))
            continue
        w = max(coords, key=rank)
        counts = jet.lookup(w)[1]
        i = next(k for k, v in enumerate(counts) if v)
        lower = jet.coord(0, tuple(v - (1 if k == i else 0) for k, v in enumerate(counts)))
        parts = collect(E, [w])
        if any(mono not in (1, w) for mono in parts):
            raise IntegrationIncomplete(f"{E} is not linear in {w}")
        coeff = parts[w]
        if any(jet.order_of(c) >= jet.order_of(w) for c in jet.coordinates_in(coeff)):
            raise IntegrationIncomplete(f"coefficient of {w} involves coordinates of the same order")
        G = _antiderivative(coeff, lower)
        if G is None:
            raise IntegrationIncomplete(f"cannot integrate {coeff} with respect to {lower}")
        comps[i] += G
        E = normalize(E - jet.total_derivative(G, i))
    else:
        raise IntegrationIncomplete("integration by parts did not terminate")
    comps = tuple(normalize(c) for c in comps)
    verified = is_zero(jet.divergence(comps) - target)
    return ConservedCurrent(comps, verified, Q)
