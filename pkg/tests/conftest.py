import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jetcons.dsl import parse_session  # noqa: E402

WAVE = """
vars t, x;
deps u;
funcs b(u), c(u), m(u);
unknowns Q(t, x, u), R(t, x);
equation F = u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] + m(u) solve u[t,t];
"""

WAVE_W1 = """
vars t, x;
deps u;
equation F = u[t,t] - u[x,x] + u*u[t] + u*u[x] + u^2 solve u[t,t];
"""

WAVE_DAMPED = """
vars t, x;
deps u;
funcs b(u), c(u);
equation F = u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] solve u[t,t];
"""

WAVE_VARIATIONAL = """
vars t, x;
deps u;
equation F = u[t,t] - u[x,x] + u^3 solve u[t,t];
"""

HEAT = """
vars t, x;
deps u;
unknowns Q(t, x);
equation F = u[t] - u[x,x] solve u[t];
"""

PLAIN = """
vars t, x;
deps u;
"""


def session(name: str):
    return parse_session(globals()[name])


@pytest.fixture(scope="session")
def wave():
    return parse_session(WAVE)


@pytest.fixture(scope="session")
def w1():
    return parse_session(WAVE_W1)


@pytest.fixture(scope="session")
def damped():
    return parse_session(WAVE_DAMPED)


@pytest.fixture(scope="session")
def variational_wave():
    return parse_session(WAVE_VARIATIONAL)


@pytest.fixture(scope="session")
def heat():
    return parse_session(HEAT)


@pytest.fixture(scope="session")
def plain():
    return parse_session(PLAIN)


WAVE_UV = """
vars t, x;
deps u, v;
funcs b(u), c(u), m(u);
"""

PLAIN_UW = """
vars t, x;
deps u, w;
"""


def fixture_session(name: str):
    from jetcons.corpus import load_fixtures

    (fx,) = [f for f in load_fixtures() if f.name == name]
    return parse_session(fx.source)


# (fixture, P, Q): symmetry / adjoint-symmetry pairs over the corpus
CORPUS_PAIRS = [
    ("wave-w1", "-u[t]", "exp(t+x)"),
    ("wave-w1", "-u[x]", "exp(t+x)"),
    ("wave-damped", "-u[t]", "1"),
    ("wave-damped", "-u[x]", "1"),
    ("wave-row2", "-u[t]", "Q"),
    ("wave-row2", "-u[x]", "Q"),
    ("wave-row3-upper", "-u[t]", "Q"),
    ("wave-row3-upper", "-u[x]", "Q"),
    ("wave-row3-upper", "-u[t]", "Qexp"),
    ("wave-row3-lower", "-u[t]", "Q"),
    ("wave-row3-lower", "-u[x]", "Qlin"),
    ("wave-variational", "-u[t]", "-u[x]"),
    ("wave-variational", "-u[x]", "-u[t]"),
    ("wave-linear", "-u[t]", "u"),
    ("heat", "-u[x]", "exp(x-t)"),
]

# (fixture, P, C): symmetries acting on conserved currents
CORPUS_CURRENTS = [
    ("wave-damped", "-u[t]", "(u[t] + int(b,u), -u[x] + int(c,u))"),
    ("wave-damped", "-u[x]", "(u[t] + int(b,u), -u[x] + int(c,u))"),
    ("wave-w1", "-u[t]", "(exp(t+x)*(u[t] - u + u^2/2), exp(t+x)*(-u[x] + u + u^2/2))"),
    ("wave-w1", "-u[x]", "(exp(t+x)*(u[t] - u + u^2/2), exp(t+x)*(-u[x] + u + u^2/2))"),
    ("wave-variational", "-u[x]", "(u[t]^2/2 + u[x]^2/2 + u^4/4, -u[t]*u[x])"),
    ("wave-variational", "-u[t]", "(u[t]*u[x], -u[t]^2/2 - u[x]^2/2 + u^4/4)"),
    ("heat", "-u[x]", "(u, -u[x])"),
    ("heat", "-u[t]", "(u, -u[x])"),
]


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
