import pytest

from jetcons.corpus import SOURCES, load_fixtures, parse_fixture, run_corpus, run_fixture
from jetcons.errors import FixtureCorrupt

NAMES = [
    "heat",
    "wave-damped",
    "wave-first-order-2-advisory",
    "wave-first-order-advisory",
    "wave-general",
    "wave-linear",
    "wave-row2",
    "wave-row3-lower",
    "wave-row3-upper",
    "wave-variational",
    "wave-w1",
]

SMALL = """vars t, x;
deps u;
equation F = u[t,t] - u[x,x] + u solve u[t,t];
---
name: small
expectations:
  - command: check-adjoint-symmetry
    args: Q=u
    verdict: adjoint-symmetry
    exit: 0
    source: derived
"""


@pytest.fixture(scope="module")
def fixtures():
    return load_fixtures()


@pytest.fixture(scope="module")
def summary(fixtures):
    return run_corpus(fixtures, probes=3, seed=11)


def test_fixture_names(fixtures):
    assert [f.name for f in fixtures] == NAMES
    assert [f.advisory for f in fixtures] == ["advisory" in n for n in NAMES]


def test_every_expectation_has_a_source(fixtures):
    for fx in fixtures:
        assert fx.expectations
        assert {e.source for e in fx.expectations} <= set(SOURCES)


def test_gating_expectations_all_pass(summary):
    failed = [r for r in summary["results"] if not r["passed"] and not r["advisory"]]
    assert failed == []
    assert summary["gating_failed"] == 0
    assert summary["fixtures"] == len(NAMES)
    assert summary["expectations"] == summary["gating_passed"] + summary["advisory_passed"] + summary["advisory_failed"]


def test_advisory_expectations_reported(summary):
    advisory = [r for r in summary["results"] if r["advisory"]]
    assert advisory
    assert {r["fixture"] for r in advisory} == {n for n in NAMES if "advisory" in n}


def test_probes(summary):
    assert summary["probes"]["per_fixture"] == 3
    assert summary["probes"]["passed"] == {n: 3 for n in NAMES}


def test_small_fixture():
    fx = parse_fixture(SMALL)
    (result,) = run_fixture(fx)
    assert result["passed"], result["problems"]


def test_wrong_expectation_is_reported():
    fx = parse_fixture(SMALL.replace("verdict: adjoint-symmetry", "verdict: not an adjoint-symmetry"))
    (result,) = run_fixture(fx)
    assert not result["passed"]
    assert "verdict" in result["problems"][0]


def test_bad_session_is_a_failed_result():
    fx = parse_fixture(SMALL.replace("u solve", "u $ solve"))
    (result,) = run_fixture(fx)
    assert result["command"] == "parse" and not result["passed"]


@pytest.mark.parametrize("text", [
    SMALL.replace("---\n", ""),
    SMALL.replace("name: small\n", ""),
    SMALL.replace("source: derived", "source: folklore"),
    SMALL.replace("  - command: check-adjoint-symmetry\n", "  - cmd: check-adjoint-symmetry\n"),
    SMALL.split("---")[0] + "---\nname: [unclosed\n",
])
def test_corrupt_fixtures(text):
    with pytest.raises(FixtureCorrupt) as err:
        parse_fixture(text)
    assert err.value.code == "FixtureCorrupt"


def test_bad_role_arguments_are_corrupt():
    fx = parse_fixture(SMALL.replace("args: Q=u", "args: Q=u stray"))
    with pytest.raises(FixtureCorrupt):
        run_fixture(fx)
