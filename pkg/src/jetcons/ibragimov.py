"""The extended Lagrangian ``L = v.F`` and the currents it produces.

The adjoint variables ``v`` are fresh dependent variables of an extended
jet space.  Symmetries are extended in characteristic form,
``(P, -R_P*(v))``, so no canonical-form bookkeeping is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import sympy as sp

from .conslaw import (
    ConservedCurrent,
    adjoint_symmetry_residual,
    extract_symmetry_operator,
)
from .desystem import DESystem, LinearDiffOperator, check_nonsingular, decompose_off_shell
from .errors import MissingPointForm, NotAnAdjointSymmetry
from .expr import is_zero, normalize
from .jet import GeneratorCharacteristic, JetSpace
from .variational import adjoint_frechet, euler, frechet, pair_boundary_current

__all__ = [
    "ExtendedSystem",
    "ExtendedSymmetry",
    "build_extended_system",
    "extend_symmetry",
    "variational_invariance_check",
    "noether_current",
    "noether_identity_residual",
    "self_adjointness_check",
    "equivalence_check",
    "substitute_adjoint_variables",
]


@dataclass
class ExtendedSystem:
    base: DESystem
    jet: JetSpace
    v: tuple
    L: object
    adjoint_equations: tuple
    system: Optional[DESystem]
    verified: bool

    def reduce(self, e):
        """Reduce on the solutions of both ``F = 0`` and ``F* = 0``."""
        if self.system is None:
            raise ValueError("the adjoint equations have no solved form; on-shell reduction is unavailable")
        return self.system.reduce(e)


@dataclass
class ExtendedSymmetry:
    P: tuple
    v_part: tuple
    operator: LinearDiffOperator
    generator: Optional[GeneratorCharacteristic] = None

    @property
    def characteristic(self) -> tuple:
        return tuple(self.P) + tuple(self.v_part)


def _solved_adjoint_system(sys: DESystem, jet: JetSpace, Fstar: list) -> Optional[DESystem]:
    """``F = 0, F* = 0`` with ``F*_alpha`` solved for ``v^a_K`` when ``F_a`` leads with ``u^alpha_K``."""
    base = sys.jet
    if sys.M != base.m:
        return None
    leading = [jet.coord(base.dependent[a], counts) for a, counts in (base.lookup(l) for l in sys.leading)]
    equations = list(sys.equations)
    names = list(sys.names)
    for alpha in range(base.m):
        match = [a for a, l in enumerate(sys.leading) if base.lookup(l)[0] == alpha]
        if len(match) != 1:
            return None
        a = match[0]
        counts = base.lookup(sys.leading[a])[1]
        leading.append(jet.coord(base.m + a, counts))
        equations.append(Fstar[alpha])
        names.append(f"{names[a]}*")
    try:
        return DESystem(jet, equations, leading, names)
    except Exception:
        return None


def build_extended_system(sys: DESystem, v_name: str = "v") -> ExtendedSystem:
    base = sys.jet
    names = []
    for a in range(sys.M):
        stem = v_name if sys.M == 1 else f"{v_name}{a + 1}"
        name = base.fresh_name(stem)
        while name in names:
            name += "_"
        names.append(name)
    jet = base.extend(names)
    v = tuple(jet.u(base.m + a) for a in range(sys.M))
    L = normalize(sp.Add(*[va * Fa for va, Fa in zip(v, sys.equations)]))
    Fstar = adjoint_frechet(sys.equations, v, jet)[: base.m]
    ok = all(is_zero(euler(L, base.m + a, jet) - sys.equations[a]) for a in range(sys.M))
    ok = ok and all(is_zero(euler(L, alpha, jet) - Fstar[alpha]) for alpha in range(base.m))
    return ExtendedSystem(sys, jet, v, L, tuple(Fstar), _solved_adjoint_system(sys, jet, Fstar), ok)


def _on(jet: JetSpace, op: LinearDiffOperator) -> LinearDiffOperator:
    return LinearDiffOperator(jet, op.rows, op.cols, op.terms)


def extend_symmetry(P, ext: ExtendedSystem) -> ExtendedSymmetry:
    """``(P, -R_P*(v))``, the characteristic of the extended generator."""
    gen = P if isinstance(P, GeneratorCharacteristic) else None
    P = tuple(gen.P) if gen else tuple(normalize(p) for p in (P if isinstance(P, (list, tuple)) else [P]))
    RP = extract_symmetry_operator(P, ext.base)
    v_part = tuple(normalize(-e) for e in _on(ext.jet, RP).adjoint().apply(list(ext.v)))
    return ExtendedSymmetry(P, v_part, RP, gen)


def _theta(sym: ExtendedSymmetry, ext: ExtendedSystem) -> tuple:
    """``Theta`` with ``v.R_P(F) - F.R_P*(v) = D_i Theta^i``."""
    return _on(ext.jet, sym.operator).boundary_current(list(ext.v), list(ext.base.equations))


def variational_invariance_check(sym: ExtendedSymmetry, ext: ExtendedSystem):
    """``pr X^ext(L) - D_i Theta^i``; zero certifies the extension is a variational symmetry."""
    prL = frechet([ext.L], list(sym.characteristic), ext.jet)[0]
    return normalize(prL - ext.jet.divergence(_theta(sym, ext)))


def noether_current(P, ext: ExtendedSystem, correction: str = "none") -> ConservedCurrent:
    """``Phi(P; L)``, optionally shifted by ``-xi^i L`` for point symmetries.

    ``L`` carries no derivatives of ``v``, so only the ``u`` part of the
    characteristic enters the boundary current.
    """
    sym = P if isinstance(P, ExtendedSymmetry) else extend_symmetry(P, ext)
    if correction not in ("none", "xi-L"):
        raise ValueError(f"unknown correction {correction!r}")
    w = list(sym.P) + [0] * len(ext.v)
    phi = list(pair_boundary_current([ext.L], w, [1], ext.jet))
    if correction == "xi-L":
        if sym.generator is None or not sym.generator.is_point:
            raise MissingPointForm("the xi-L correction needs a point-form generator")
        phi = [normalize(c - xi * ext.L) for c, xi in zip(phi, sym.generator.xi)]
    verified = None
    if ext.system is not None:
        verified = is_zero(ext.reduce(ext.jet.divergence(phi)))
    return ConservedCurrent(tuple(phi), verified)


def noether_identity_residual(sym: ExtendedSymmetry, ext: ExtendedSystem):
    """``D_i Phi^i - (v.R_P(F) - P.F*)``, which vanishes identically."""
    phi = noether_current(sym, ext).components
    RPF = _on(ext.jet, sym.operator).apply(list(ext.base.equations))
    rhs = sum(va * r for va, r in zip(ext.v, RPF)) - sum(p * f for p, f in zip(sym.P, ext.adjoint_equations))
    return normalize(ext.jet.divergence(phi) - rhs)


def self_adjointness_check(sys: DESystem, phi):
    """Whether ``F*|_{v=phi}`` is an operator applied to ``F``; returns ``(flag, lambda)``.

    This is the adjoint-symmetry condition for ``phi``, and ``lambda`` is the
    adjoint-symmetry operator ``R_Q``.
    """
    phi = tuple(normalize(p) for p in (phi if isinstance(phi, (list, tuple)) else [phi]))
    for p in phi:
        check_nonsingular(p, sys, "substitution")
    dec = decompose_off_shell(adjoint_frechet(sys.equations, phi, sys.jet), sys)
    if all(is_zero(r) for r in dec.residual):
        return True, dec.operator
    return False, None


def substitute_adjoint_variables(e, ext: ExtendedSystem, Q):
    """Replace every jet coordinate ``v^a_K`` by ``D_K Q^a``."""
    Q = tuple(Q) if isinstance(Q, (list, tuple)) else (Q,)
    base_m = ext.base.jet.m
    subs = {}
    for c in ext.jet.coordinates_in(e):
        a, counts = ext.jet.lookup(c)
        if a >= base_m:
            subs[c] = ext.base.jet.iterated_total_derivative(Q[a - base_m], counts)
    return normalize(sp.sympify(e).xreplace(subs))


def equivalence_check(P, Q, sys: DESystem, ext: Optional[ExtendedSystem] = None) -> bool:
    """``Phi(P; L)|_{v=Q} == Psi(P, Q; F)`` component-wise."""
    ext = ext or build_extended_system(sys)
    P = tuple(normalize(p) for p in (P if isinstance(P, (list, tuple)) else [P]))
    Q = tuple(normalize(q) for q in (Q if isinstance(Q, (list, tuple)) else [Q]))
    if not all(is_zero(r) for r in adjoint_symmetry_residual(Q, sys)):
        raise NotAnAdjointSymmetry(f"{Q} is not an adjoint-symmetry")
    phi = noether_current(P, ext).components
    psi = pair_boundary_current(sys.equations, P, Q, sys.jet)
    return all(is_zero(substitute_adjoint_variables(f, ext, Q) - g) for f, g in zip(phi, psi))
