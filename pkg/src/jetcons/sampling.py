"""Seeded random differential functions for identity probes."""

from __future__ import annotations

import random

import sympy as sp

from .expr import function_atom
from .jet import JetSpace


def random_expression(
    jet: JetSpace,
    rng: random.Random,
    max_order: int = 3,
    max_degree: int = 3,
    terms: int = 3,
    dep=None,
    use_functions: bool = True,
):
    """A polynomial in jet coordinates (and registered functions of ``u``).

    Each of ``terms`` monomials has a nonzero integer coefficient in
    ``[-3, 3]`` and total degree between 1 and ``max_degree``.
    """
    pool = list(jet.coordinates(dep, max_order)) + list(jet.x)
    if use_functions:
        for name, arg in sorted(jet.functions.items()):
            if arg in jet.dependent:
                pool.append(function_atom(name)(jet.u(arg)))
    total = sp.Integer(0)
    for _ in range(terms):
        coeff = rng.choice([-3, -2, -1, 1, 2, 3])
        degree = rng.randint(1, max_degree)
        total += coeff * sp.Mul(*[rng.choice(pool) for _ in range(degree)])
    return sp.expand(total)

