import random

import pytest
import sympy as sp
from hypothesis import given, settings

from jetcons.desystem import (
    DESystem,
    LinearDiffOperator,
    adjoint_operator,
    apply_operator,
    decompose_off_shell,
    reduce_on_shell,
)
from jetcons.dsl import parse_session
from jetcons.errors import LeadingDerivativeInvalid, ShapeMismatch
from jetcons.expr import is_zero
from jetcons.jet import multi_indices
from jetcons.sampling import random_expression
from jetcons.variational import frechet
from strategies import expressions, seeds


def test_reduce_examples(wave):
    sys = wave.system
    shell = wave.parse("u[x,x] - b(u)*u[t] - c(u)*u[x] - m(u)")
    assert is_zero(reduce_on_shell(wave.parse("u[t,t]"), sys) - shell)
    got = reduce_on_shell(wave.parse("u[t,t,x]"), sys)
    assert is_zero(got - reduce_on_shell(wave.jet.D(shell, "x"), sys))
    assert not any(sys.is_leading_descendant(c) for c in wave.jet.coordinates_in(got))
    assert reduce_on_shell(wave.parse("u[x,x]"), sys) == wave.parse("u[x,x]")


def test_reduce_high_descendants(wave):
    sys = wave.system
    got = reduce_on_shell(wave.parse("u[t,t,t,t]"), sys)
    assert got != 0
    assert not any(sys.is_leading_descendant(c) for c in wave.jet.coordinates_in(got))


def test_scaled_leading_coefficient():
    s = parse_session("vars t, x; deps u; equation F = 2*u[t] - u[x,x] solve u[t];")
    assert is_zero(s.system.reduce(s.parse("u[t]")) - s.parse("u[x,x]/2"))


@pytest.mark.parametrize("source", [
    "vars t, x; deps u; equation F = u*u[t] - u[x,x] solve u[t];",
    "vars t, x; deps u; equation F = u[t] - u[t,x] solve u[t];",
    "vars t, x; deps u; equation F = u[t] - u[x] solve u[t]; equation G = u[t] + u solve u[t];",
])
def test_invalid_leading_derivatives(source):
    with pytest.raises(LeadingDerivativeInvalid):
        parse_session(source)


def test_shape_of_leading_list(wave):
    with pytest.raises(ShapeMismatch):
        DESystem(wave.jet, [wave.parse("u[t]")], [])


def test_decompose_examples(wave):
    sys = wave.system
    jet = wave.jet
    F = sys.equations[0]
    d = decompose_off_shell(frechet([F], [wave.parse("-u[t]")], jet), sys)
    assert d.residual == [0]
    assert d.operator.equals(LinearDiffOperator.derivative(jet, "t", -1))
    d = decompose_off_shell(F, sys)
    assert d.residual == [0] and d.operator.equals(LinearDiffOperator.multiplication(jet, [[1]]))
    assert d.linear


def test_decompose_flags_nonlinear_slack(wave):
    sys = wave.system
    F = sys.equations[0]
    d = decompose_off_shell(F * wave.jet.D(F, "x"), sys)
    assert not d.linear
    assert is_zero(d.residual[0] + apply_operator(d.operator, [F])[0] - F * wave.jet.D(F, "x"))


def test_adjoint_examples(wave):
    jet = wave.jet
    Dt = LinearDiffOperator.derivative(jet, "t", -1)
    assert adjoint_operator(Dt).equals(LinearDiffOperator.derivative(jet, "t"))
    Qu = LinearDiffOperator.multiplication(jet, [[wave.parse("diff(Q, u)")]])
    assert adjoint_operator(Qu).equals(Qu)


def test_adjoint_of_point_operator(wave):
    jet = wave.jet
    tau, xi, eta = wave.parse("(t*u, x + u^2, exp(t)*u^2)")
    R = LinearDiffOperator(jet, 1, 1, {(0, 0): {
        (1, 0): -tau,
        (0, 1): -xi,
        (0, 0): sp.diff(eta, wave.parse("u")) - jet.D(tau, "t") - jet.D(xi, "x"),
    }})
    want = LinearDiffOperator(jet, 1, 1, {(0, 0): {(1, 0): tau, (0, 1): xi, (0, 0): sp.diff(eta, wave.parse("u"))}})
    assert adjoint_operator(R).equals(want)


def test_apply_shape(wave):
    with pytest.raises(ShapeMismatch):
        LinearDiffOperator.zero(wave.jet, 1, 2).apply([wave.parse("u")])


def test_describe_and_to_dict(wave):
    R = LinearDiffOperator.derivative(wave.jet, "t", -1)
    assert R.describe() == "(-1)*D[t]"
    assert R.to_dict() == {"0,0": {"t": "-1"}}
    assert LinearDiffOperator.zero(wave.jet, 1, 1).describe() == "0"


def random_operator(jet, rng, rows=1, cols=1, order=2):
    terms = {}
    for r in range(rows):
        for c in range(cols):
            block = {}
            for k in range(order + 1):
                for counts in multi_indices(jet.n, k):
                    if rng.random() < 0.5:
                        block[counts] = random_expression(jet, rng, max_order=1, max_degree=2, terms=2)
            terms[(r, c)] = block
    return LinearDiffOperator(jet, rows, cols, terms)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_double_adjoint(wave, seed):
    R = random_operator(wave.jet, random.Random(seed), rows=2, cols=1)
    assert R.adjoint().adjoint().equals(R)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_adjoint_boundary_current(wave, seed):
    rng = random.Random(seed)
    jet = wave.jet
    R = random_operator(jet, rng)
    v = random_expression(jet, rng, max_order=1, max_degree=2, terms=2)
    w = random_expression(jet, rng, max_order=1, max_degree=2, terms=2)
    lhs = v * R.apply([w])[0] - w * R.adjoint().apply([v])[0]
    assert is_zero(lhs - jet.divergence(R.boundary_current([v], [w])))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_reduce_is_an_idempotent_morphism(wave, seed):
    sys = wave.system
    e1, e2 = expressions(wave.jet, seed, 2, max_order=4, max_degree=2)
    r1 = sys.reduce(e1)
    assert sys.reduce(r1) == r1
    assert is_zero(sys.reduce(e1 * e2) - sys.reduce(r1 * sys.reduce(e2)))
    assert is_zero(sys.reduce(e1 + e2) - r1 - sys.reduce(e2))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_decompose_round_trip(wave, seed):
    sys = wave.system
    (e,) = expressions(wave.jet, seed, 1, max_order=4)
    d = decompose_off_shell(e, sys)
    assert d.residual[0] == sys.reduce(e)
    assert is_zero(d.residual[0] + d.operator.apply(list(sys.equations))[0] - e)


def test_feedback_between_solved_forms():
    from jetcons.errors import NonTerminating

    s = parse_session("""
    vars t, x; deps u, v;
    equation F = u[t] - v[x] solve u[t];
    equation G = v[x] - u[t] + u solve v[x];
    """)
    with pytest.raises(NonTerminating):
        s.system.reduce(s.parse("u[t]"))
