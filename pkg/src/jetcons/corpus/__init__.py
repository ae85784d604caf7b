"""Bundled fixtures and the runner behind ``jetcons corpus``.

A fixture file holds a session, a line containing only ``---``, and a YAML
block::

    name: wave-damped
    description: ...
    advisory: false
    expectations:
      - command: triviality
        args: P=-u[t] Q=1
        verdict: trivial
        exit: 0
        source: published
        expect:
          multiplier: "0"

``expect`` values are compared semantically: expressions by exact
difference, ``{span: [...]}`` by mutual reduction of equation lists,
``{modulo_trivial: ...}`` by a vanishing multiplier of the difference of two
currents, and anything else by equality.  ``source`` is one of ``published`` (read off the
published tables and text), ``derived`` (instantiated or computed by hand
and cross-checked) or ``trivial``.
"""

from __future__ import annotations

import random
import shlex
from dataclasses import dataclass, field
from importlib import resources

import yaml

from ..dsl import Session, parse_session
from ..errors import FixtureCorrupt, JetconsError
from ..expr import is_zero

__all__ = ["Expectation", "Fixture", "load_fixtures", "parse_fixture", "run_fixture", "run_corpus"]

SOURCES = ("published", "derived", "trivial")


@dataclass(frozen=True)
class Expectation:
    command: str
    args: tuple
    source: str
    verdict: str | None = None
    exit: int | None = None
    expect: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    source: str
    expectations: tuple
    advisory: bool = False


def _args(raw) -> list:
    if raw is None:
        return []
    if isinstance(raw, str):
        return shlex.split(raw)
    return [str(a) for a in raw]


def parse_fixture(text: str, origin: str = "<fixture>") -> Fixture:
    lines = text.split("\n")
    try:
        cut = next(i for i, line in enumerate(lines) if line.strip() == "---")
    except StopIteration:
        raise FixtureCorrupt(f"{origin}: no '---' separator") from None
    dsl = "\n".join(lines[:cut])
    try:
        meta = yaml.safe_load("\n".join(lines[cut + 1:]))
    except yaml.YAMLError as err:
        raise FixtureCorrupt(f"{origin}: {err}") from None
    if not isinstance(meta, dict) or "name" not in meta:
        raise FixtureCorrupt(f"{origin}: metadata needs a name")
    exps = []
    for k, raw in enumerate(meta.get("expectations") or []):
        if not isinstance(raw, dict) or "command" not in raw:
            raise FixtureCorrupt(f"{origin}: expectation {k} has no command")
        if raw.get("source") not in SOURCES:
            raise FixtureCorrupt(f"{origin}: expectation {k} needs a source in {SOURCES}")
        exps.append(Expectation(
            command=raw["command"],
            args=tuple(_args(raw.get("args"))),
            source=raw["source"],
            verdict=raw.get("verdict"),
            exit=raw.get("exit"),
            expect=dict(raw.get("expect") or {}),
        ))
    return Fixture(meta["name"], meta.get("description", ""), dsl, tuple(exps), bool(meta.get("advisory", False)))


def load_fixtures() -> list:
    """Every bundled fixture, sorted by name."""
    out = []
    for entry in sorted(resources.files(__package__).joinpath("fixtures").iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".jc"):
            out.append(parse_fixture(entry.read_text(encoding="utf-8"), entry.name))
    names = [f.name for f in out]
    if len(set(names)) != len(names):
        raise FixtureCorrupt("duplicate fixture names")
    return sorted(out, key=lambda f: f.name)


def _same(session: Session, actual, expected) -> bool:
    if isinstance(expected, dict) and "span" in expected:
        from ..conslaw import mutually_reducible

        theirs = [session.parse(e) for e in expected["span"]]
        ours = [session.parse(e) for e in actual]
        return mutually_reducible(ours, theirs)
    if isinstance(expected, dict) and "modulo_trivial" in expected:
        from ..conslaw import multiplier_from_current

        ours = [session.parse(c) for c in actual]
        theirs = session.parse(expected["modulo_trivial"])
        if len(ours) != len(theirs):
            return False
        return multiplier_from_current([a - b for a, b in zip(ours, theirs)], session.system).is_zero()
    if isinstance(expected, bool) or isinstance(expected, int) and not isinstance(actual, str):
        return actual == expected
    if isinstance(expected, (str, int)):
        if isinstance(actual, list):
            actual = "(" + ", ".join(actual) + ")"
        if not isinstance(actual, str):
            return False
        a, e = session.parse(actual), session.parse(str(expected))
        a = a if isinstance(a, tuple) else (a,)
        e = e if isinstance(e, tuple) else (e,)
        return len(a) == len(e) and all(is_zero(x - y) for x, y in zip(a, e))
    if isinstance(expected, list):
        return isinstance(actual, list) and len(actual) == len(expected) and all(
            _same(session, x, y) for x, y in zip(actual, expected))
    return actual == expected


def run_fixture(fixture: Fixture) -> list:
    """One result dict per expectation."""
    from ..cli import _config, build_parser, execute

    results = []
    try:
        session = parse_session(fixture.source)
    except JetconsError as err:
        return [{"fixture": fixture.name, "command": "parse", "args": [], "passed": False,
                 "advisory": fixture.advisory, "source": "trivial", "problems": [f"{err.code}: {err}"]}]
    parser = build_parser()
    for exp in fixture.expectations:
        problems = []
        ns = parser.parse_args([exp.command, *exp.args])
        try:
            cfg = _config(ns)
        except JetconsError as err:
            raise FixtureCorrupt(f"{fixture.name}: {err}") from None
        report, code = execute(session, cfg)
        if exp.verdict is not None and report["verdict"] != exp.verdict:
            problems.append(f"verdict {report['verdict']!r}, expected {exp.verdict!r}")
        if exp.exit is not None and code != exp.exit:
            problems.append(f"exit {code}, expected {exp.exit}")
        result = report.get("result") or {}
        for key, want in exp.expect.items():
            got = result.get(key, report.get(key))
            try:
                ok = _same(session, got, want)
            except JetconsError as err:
                ok = False
                problems.append(f"{key}: {err.code}: {err}")
            if not ok:
                problems.append(f"{key}: got {got!r}, expected {want!r}")
        if "error" in report and exp.verdict != "error":
            problems.append(f"{report['error']['code']}: {report['error']['message']}")
        results.append({
            "fixture": fixture.name,
            "command": exp.command,
            "args": list(exp.args),
            "source": exp.source,
            "advisory": fixture.advisory,
            "passed": not problems,
            "problems": problems,
        })
    return results


def _probe(session: Session, rng: random.Random) -> bool:
    """One Frechet/adjoint identity check on the fixture's jet space."""
    from ..sampling import random_expression
    from ..variational import adjoint_frechet, frechet, pair_boundary_current

    jet = session.jet
    f = random_expression(jet, rng, max_order=2, max_degree=2, terms=2)
    w = random_expression(jet, rng, max_order=2, max_degree=2, terms=2)
    v = random_expression(jet, rng, max_order=2, max_degree=2, terms=2)
    psi = pair_boundary_current([f], [w], [v], jet)
    lhs = v * frechet([f], [w], jet)[0] - w * adjoint_frechet([f], [v], jet)[0]
    return is_zero(lhs - jet.divergence(psi))


def run_corpus(fixtures, probes: int = 0, seed: int = 0) -> dict:
    results = []
    probe_counts = {}
    for fx in fixtures:
        results.extend(run_fixture(fx))
        if probes:
            rng = random.Random(f"{seed}:{fx.name}")
            session = parse_session(fx.source)
            probe_counts[fx.name] = sum(_probe(session, rng) for _ in range(probes))
    gating = [r for r in results if not r["advisory"]]
    summary = {
        "fixtures": len(fixtures),
        "expectations": len(results),
        "gating_passed": sum(r["passed"] for r in gating),
        "gating_failed": sum(not r["passed"] for r in gating),
        "advisory_passed": sum(r["passed"] for r in results if r["advisory"]),
        "advisory_failed": sum(not r["passed"] for r in results if r["advisory"]),
        "results": results,
    }
    if probes:
        summary["probes"] = {"per_fixture": probes, "seed": seed, "passed": probe_counts}
    return summary
