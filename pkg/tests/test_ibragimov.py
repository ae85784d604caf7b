import random

import pytest
from hypothesis import given, settings

import frozen
from conftest import CORPUS_PAIRS, WAVE_UV, fixture_session, session
from jetcons.desystem import DESystem, LinearDiffOperator
from jetcons.dsl import parse_session
from jetcons.errors import MissingPointForm, NotAnAdjointSymmetry, NotASymmetry, SingularOnShell
from jetcons.expr import is_zero
from jetcons.ibragimov import (
    build_extended_system,
    equivalence_check,
    extend_symmetry,
    noether_current,
    noether_identity_residual,
    self_adjointness_check,
    substitute_adjoint_variables,
    variational_invariance_check,
)
from jetcons.conslaw import adjoint_symmetry_residual
from jetcons.jet import characteristic_from_point_symmetry
from jetcons.sampling import random_expression
from jetcons.variational import euler
from strategies import seeds

TILDE = """
vars t, x;
deps u;
equation F = u[t,t] - u[x,x] - (u[t]^2 - u[x]^2) + u*(u[t] - u[x]) solve u[t,t];
"""


@pytest.fixture(scope="module")
def uv():
    return parse_session(WAVE_UV)


@pytest.fixture(scope="module")
def ext(wave):
    return build_extended_system(wave.system)


def test_wave_extension(ext, uv):
    assert ext.verified
    assert ext.jet.dependent == ("u", "v")
    assert is_zero(ext.adjoint_equations[0] - uv.parse(frozen.WAVE_FSTAR))
    assert is_zero(ext.L - uv.parse("v*(u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] + m(u))"))


def test_linear_wave_is_formally_self_adjoint():
    s = parse_session("vars t, x; deps u; equation F = u[t,t] - u[x,x] solve u[t,t];")
    e = build_extended_system(s.system)
    assert is_zero(e.adjoint_equations[0] - e.jet.coord("v", "tt") + e.jet.coord("v", "xx"))


def test_strict_self_adjointness(variational_wave):
    lin = fixture_session("wave-linear")
    e = build_extended_system(lin.system)
    at_u = substitute_adjoint_variables(e.adjoint_equations[0], e, [lin.parse("u")])
    assert is_zero(at_u - lin.system.equations[0])
    # with m = u^3 the substitution gives 3u^3 instead of u^3
    e = build_extended_system(variational_wave.system)
    at_u = substitute_adjoint_variables(e.adjoint_equations[0], e, [variational_wave.parse("u")])
    assert is_zero(at_u - variational_wave.system.equations[0] - 2 * variational_wave.parse("u^3"))


def test_extended_system_reduces_both_equations(ext, uv):
    # v_tt is eliminated through F* = 0
    got = ext.reduce(uv.parse("v[t,t]"))
    assert is_zero(got - uv.parse("v[x,x] + b(u)*v[t] + c(u)*v[x] - m'(u)*v"))


def test_translation_extension(wave, ext, uv):
    sym = extend_symmetry(wave.parse("-u[t]"), ext)
    assert sym.v_part == (-uv.parse("v[t]"),)
    assert variational_invariance_check(sym, ext) == 0


def test_point_extension_and_scaling():
    s = parse_session("vars t, x; deps u; equation F = u[t,t] - u[x,x] + u solve u[t,t];")
    e = build_extended_system(s.system)
    g = characteristic_from_point_symmetry(s.jet, (0, 0), (s.parse("u"),))
    sym = extend_symmetry(g, e)
    assert sym.v_part == (-e.v[0],)
    boost = characteristic_from_point_symmetry(s.jet, s.parse("(x, t)"), (0,))
    sym = extend_symmetry(boost, e)
    want = -(s.parse("x") * e.jet.coord("v", "t") + s.parse("t") * e.jet.coord("v", "x"))
    assert is_zero(sym.v_part[0] - want)
    assert variational_invariance_check(sym, e) == 0


def test_point_symmetry_with_exponential_coefficient():
    s = parse_session(TILDE)
    e = build_extended_system(s.system)
    g = characteristic_from_point_symmetry(s.jet, (0, 0), (s.parse("exp((t+x)/2)"),))
    sym = extend_symmetry(g, e)
    assert variational_invariance_check(sym, e) == 0
    assert noether_identity_residual(sym, e) == 0
    assert noether_current(sym, e).verified


def test_zero_symmetry(wave, ext):
    sym = extend_symmetry(0, ext)
    assert variational_invariance_check(sym, ext) == 0
    assert noether_current(sym, ext).components == (0, 0)


def test_extension_needs_a_symmetry(wave, ext):
    with pytest.raises(NotASymmetry):
        extend_symmetry(wave.parse("u"), ext)


def test_noether_current_display(wave, ext, uv):
    jet = ext.jet
    v = uv.parse("v")
    for name in ("-u[t]", "-u[x]"):
        P = wave.parse(name)
        phi = noether_current(P, ext)
        assert phi.verified
        want_t = v * jet.D(P, "t") + (uv.parse("b(u)") * v - jet.D(v, "t")) * P
        want_x = -v * jet.D(P, "x") + (uv.parse("c(u)") * v + jet.D(v, "x")) * P
        assert is_zero(phi[0] - want_t) and is_zero(phi[1] - want_x)
        assert all(substitute_adjoint_variables(c, ext, [0]) == 0 for c in phi)


def test_xi_l_correction(wave, ext):
    g = characteristic_from_point_symmetry(wave.jet, (1, 0), (0,))
    plain = noether_current(g, ext)
    corrected = noether_current(g, ext, correction="xi-L")
    assert corrected.verified
    difference = [a - b for a, b in zip(corrected, plain)]
    assert is_zero(difference[0] + ext.L) and difference[1] == 0
    assert all(ext.reduce(d) == 0 for d in difference)


def test_xi_l_correction_needs_point_form(wave, ext):
    with pytest.raises(MissingPointForm):
        noether_current(wave.parse("-u[t]"), ext, correction="xi-L")
    with pytest.raises(ValueError):
        noether_current(wave.parse("-u[t]"), ext, correction="other")


def test_self_adjointness_examples(wave, w1):
    ok, lam = self_adjointness_check(w1.system, w1.parse("exp(t+x)"))
    assert ok and lam.is_zero()
    ok, lam = self_adjointness_check(wave.system, wave.parse("t"))
    assert not ok and lam is None
    s = fixture_session("wave-linear")
    ok, lam = self_adjointness_check(s.system, s.parse("u"))
    assert ok and lam.equals(LinearDiffOperator.multiplication(s.jet, [[1]]))


def test_singular_substitution(damped):
    with pytest.raises(SingularOnShell):
        self_adjointness_check(damped.system, damped.parse("1/(u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x])"))


@pytest.mark.parametrize("name, P, Q", CORPUS_PAIRS)
def test_equivalence_on_corpus(name, P, Q):
    s = fixture_session(name)
    assert equivalence_check(s.parse(P), s.parse(Q), s.system)


def test_equivalence_with_zero(w1):
    assert equivalence_check(0, w1.parse("exp(t+x)"), w1.system)
    assert equivalence_check(w1.parse("-u[t]"), 0, w1.system)


def test_equivalence_needs_adjoint_symmetry(w1):
    with pytest.raises(NotAnAdjointSymmetry):
        equivalence_check(w1.parse("-u[t]"), w1.parse("t"), w1.system)


@pytest.mark.parametrize("name, P", [
    ("wave-general", "-u[t]"),
    ("wave-general", "-u[x]"),
    ("wave-w1", "-u[t]"),
    ("wave-row3-upper", "-u[x]"),
    ("wave-variational", "-u[t]"),
    ("heat", "-u[x]"),
])
def test_noether_relation(name, P):
    s = fixture_session(name)
    e = build_extended_system(s.system)
    sym = extend_symmetry(s.parse(P), e)
    assert noether_identity_residual(sym, e) == 0
    phi = noether_current(sym, e)
    # D_i Phi^i + R_P*(v).F - P.F* vanishes on the solutions of F = 0, F* = 0
    rhs = e.jet.divergence(phi.components) - sym.v_part[0] * s.system.equations[0] - sym.P[0] * e.adjoint_equations[0]
    assert e.reduce(rhs) == 0


def random_system(seed):
    rng = random.Random(seed)
    s = session("PLAIN")
    jet = s.jet
    rest = random_expression(jet, rng, max_order=1, max_degree=2, terms=3)
    F = jet.coord("u", "tt") - jet.coord("u", "xx") + rest
    return DESystem(jet, [F], [jet.coord("u", "tt")]), rng


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_extended_system_invariants(seed):
    sys, _ = random_system(seed)
    e = build_extended_system(sys)
    assert e.verified
    assert is_zero(euler(e.L, "v", e.jet) - sys.equations[0])
    assert is_zero(euler(e.L, "u", e.jet) - e.adjoint_equations[0])


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_self_adjointness_agrees_with_adjoint_symmetry(seed):
    sys, rng = random_system(seed)
    if rng.random() < 0.3:
        phi = rng.choice([0, 1, sys.jet.x[0]])
    else:
        phi = random_expression(sys.jet, rng, max_order=1, max_degree=2, terms=2)
    ok, lam = self_adjointness_check(sys, phi)
    assert ok == all(r == 0 for r in adjoint_symmetry_residual(phi, sys))
    assert (lam is not None) == ok
