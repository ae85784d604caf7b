"""Fréchet derivatives, their adjoints, boundary currents and Euler operators.

Sums over derivative coordinates run over unordered multi-indices, so
``u[t,x]`` is a single coordinate and ``d/du[t,x]`` carries no symmetry
factor.  Boundary currents come from a fixed closed-form telescoping sum
(see :func:`green_current`) rather than from ad hoc integration by parts;
two currents that differ by a total curl are *not* equal here, and
comparisons up to trivial currents go through multipliers instead.
"""

from __future__ import annotations

from math import comb
import sympy as sp

from .errors import ShapeMismatch
from .expr import is_zero, normalize
from .jet import JetSpace, index_sequence

__all__ = [
    "green_current",
    "frechet",
    "adjoint_frechet",
    "pair_boundary_current",
    "euler",
    "euler_current",
    "higher_euler",
    "helmholtz_residual",
    "is_variational",
    "is_total_divergence",
]


def _as_tuple(f) -> tuple:
    if isinstance(f, (list, tuple)):
        return tuple(sp.sympify(c) for c in f)
    return (sp.sympify(f),)


class _Derivatives:
    """Memo of iterated total derivatives of one expression, keyed by index sequence."""

    def __init__(self, jet: JetSpace, e):
        self.jet = jet
        self.cache = {(): normalize(e)}

    def __call__(self, seq: tuple):
        seq = tuple(sorted(seq))
        if seq not in self.cache:
            parent = self(seq[:-1])
            self.cache[seq] = self.jet.total_derivative(parent, seq[-1])
        return self.cache[seq]


def green_current(g, w, counts, jet: JetSpace, dg=None, dw=None) -> list:
    """Current ``A`` with ``g D_J w - (-1)^|J| w D_J g = D_i A^i``.

    ``J`` is expanded into its sorted index sequence ``j_1 <= ... <= j_k``
    and ``A^{j_q}`` collects ``(-1)^(q-1) (D_{j_1..j_(q-1)} g)(D_{j_(q+1)..j_k} w)``.
    """
    seq = index_sequence(tuple(counts))
    dg = dg or _Derivatives(jet, g)
    dw = dw or _Derivatives(jet, w)
    comps = [sp.Integer(0)] * jet.n
    for q in range(1, len(seq) + 1):
        i = seq[q - 1]
        term = dg(seq[: q - 1]) * dw(seq[q:])
        comps[i] += term if q % 2 == 1 else -term
    return comps


def frechet(f, w, jet: JetSpace) -> list:
    """Linearization ``(delta_w f)_a`` of each component of ``f`` along ``w``."""
    f = _as_tuple(f)
    w = _as_tuple(w)
    if len(w) != jet.m:
        raise ShapeMismatch(f"direction needs {jet.m} components, got {len(w)}")
    dws = [_Derivatives(jet, wa) for wa in w]
    out = []
    for fa in f:
        total = sp.Integer(0)
        for c in jet.coordinates_in(fa):
            a, counts = jet.lookup(c)
            total += dws[a](index_sequence(counts)) * sp.diff(fa, c)
        out.append(normalize(total))
    return out


def _weights_by_coordinate(f: tuple, v: tuple, jet: JetSpace) -> dict:
    """``{coordinate: sum_a v^a d f_a / d coordinate}``."""
    weights: dict = {}
    for fa, va in zip(f, v):
        if va == 0:
            continue
        for c in jet.coordinates_in(fa):
            weights[c] = weights.get(c, 0) + va * sp.diff(fa, c)
    return weights


def adjoint_frechet(f, v, jet: JetSpace) -> list:
    """Adjoint linearization ``(delta*_v f)_alpha``, one entry per dependent variable."""
    f = _as_tuple(f)
    v = _as_tuple(v)
    if len(f) != len(v):
        raise ShapeMismatch(f"{len(f)} functions but {len(v)} adjoint weights")
    out = [sp.Integer(0)] * jet.m
    for c, g in _weights_by_coordinate(f, v, jet).items():
        a, counts = jet.lookup(c)
        term = jet.iterated_total_derivative(g, counts)
        out[a] += term if sum(counts) % 2 == 0 else -term
    return [normalize(e) for e in out]


def pair_boundary_current(f, w, v, jet: JetSpace) -> tuple:
    """``Psi`` with ``v.delta_w f - w.delta*_v f = D_i Psi^i`` exactly."""
    f = _as_tuple(f)
    w = _as_tuple(w)
    v = _as_tuple(v)
    if len(w) != jet.m or len(f) != len(v):
        raise ShapeMismatch("shapes of f, w, v do not match the jet space")
    dws = [_Derivatives(jet, wa) for wa in w]
    comps = [sp.Integer(0)] * jet.n
    for c, g in _weights_by_coordinate(f, v, jet).items():
        a, counts = jet.lookup(c)
        if w[a] == 0:
            continue
        for i, term in enumerate(green_current(g, w[a], counts, jet, dw=dws[a])):
            comps[i] += term
    return tuple(normalize(e) for e in comps)


def euler(f, dep, jet: JetSpace):
    """Variational derivative of the scalar ``f`` with respect to ``dep``."""
    return adjoint_frechet([f], [1], jet)[jet.dep_index(dep)]


def euler_current(f, w, jet: JetSpace) -> tuple:
    """``Phi`` with ``delta_w f = w.E(f) + D_i Phi^i``."""
    return pair_boundary_current([f], w, [1], jet)


def higher_euler(f, dep, counts, jet: JetSpace):
    """Higher Euler operator ``E^(J)`` in multi-index form.

    ``sum over K >= J of (-1)^|K-J| binom(K, J) D_{K-J} (df/du_K)``, with the
    multi-index binomial taken componentwise.
    """
    a = jet.dep_index(dep)
    if isinstance(counts, str) or (counts and not isinstance(counts[0], int)):
        counts = jet.counts_of(counts)
    counts = tuple(counts)
    if sum(counts) < 1:
        raise ValueError("higher Euler operators need |J| >= 1")
    f = sp.sympify(f)
    total = sp.Integer(0)
    for c in jet.coordinates_in(f):
        b, K = jet.lookup(c)
        if b != a or any(k < j for k, j in zip(K, counts)):
            continue
        rest = tuple(k - j for k, j in zip(K, counts))
        weight = 1
        for k, j in zip(K, counts):
            weight *= comb(k, j)
        term = weight * jet.iterated_total_derivative(sp.diff(f, c), rest)
        total += term if sum(rest) % 2 == 0 else -term
    return normalize(total)


def helmholtz_residual(F, jet: JetSpace, w_name: str = "w"):
    """``delta_w F - delta*_w F`` for a fresh dependent variable ``w``.

    Returns ``(residuals, extended_jet)``; the jets of ``w`` are independent
    coordinates of the extended space, so the residual vanishes identically
    exactly when the Helmholtz conditions hold.
    """
    F = _as_tuple(F)
    if len(F) != jet.m:
        raise ShapeMismatch(f"Helmholtz conditions need as many equations ({len(F)}) as unknowns ({jet.m})")
    names = [jet.fresh_name(w_name if jet.m == 1 else f"{w_name}{k + 1}") for k in range(jet.m)]
    ext = jet.extend(names)
    w = [ext.u(jet.m + k) for k in range(jet.m)]
    # F does not involve w, so linearizing along (w, 0) is the same as along w in the base space.
    direction = list(w) + [0] * jet.m
    lin = frechet(F, direction, ext)
    adj = adjoint_frechet(F, w, ext)[: jet.m]
    return [normalize(a - b) for a, b in zip(lin, adj)], ext


def is_variational(F, jet: JetSpace) -> bool:
    residuals, _ = helmholtz_residual(F, jet)
    return all(is_zero(r) for r in residuals)


def is_total_divergence(f, jet: JetSpace) -> bool:
    return all(is_zero(euler(f, a, jet)) for a in range(jet.m))

