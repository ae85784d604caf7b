"""Command line front end.

    jetcons --input wave.jc triviality P=-u[t] Q=1
    jetcons --input wave.jc --format structured determining-system --ansatz t,x,u
    jetcons corpus

Role arguments are ``NAME=EXPR`` pairs in the session language.  A bare
word fills the next free role, so ``pair-current P1 Q2`` reads the session
bindings ``P1`` and ``Q2``.  A symmetry may also be given in point form as
``xi=(..) eta=..``.

Exit status: 0 when the checked property holds, 1 when it is falsified,
2 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from .conslaw import (
    adjoint_symmetry_residual,
    extract_symmetry_operator,
    generate_determining_system,
    integrate_characteristic,
    is_trivial_pair,
    multiplier_from_current,
    multiplier_residuals,
    pair_conserved_current,
    pair_multiplier,
    symmetry_residual,
)
from .desystem import LinearDiffOperator
from .dsl import Session, parse_session, to_dsl
from .errors import JetconsError, ShapeMismatch
from .expr import is_zero
from .ibragimov import (
    build_extended_system,
    equivalence_check,
    extend_symmetry,
    noether_current,
    self_adjointness_check,
    substitute_adjoint_variables,
    variational_invariance_check,
)
from .jet import DEFAULT_MAX_ORDER, GeneratorCharacteristic, characteristic_from_point_symmetry

__all__ = ["SessionConfig", "build_parser", "run_command", "execute", "render", "main"]

# role slots filled by bare words, in order
ROLES = {
    "check-symmetry": ("P",),
    "check-adjoint-symmetry": ("Q",),
    "pair-current": ("P", "Q"),
    "pair-multiplier": ("P", "Q"),
    "triviality": ("P", "Q"),
    "multiplier-check": ("Q",),
    "extract-multiplier": ("C",),
    "determining-system": (),
    "integrate": ("Q",),
    "ibragimov": ("P", "Q"),
    "equivalence": ("P", "Q"),
    "corpus": (),
}

HELP = {
    "check-symmetry": "is P (or the point generator xi, eta) a symmetry",
    "check-adjoint-symmetry": "is Q an adjoint-symmetry (nonlinear self-adjointness with v = Q)",
    "pair-current": "conserved current of a symmetry / adjoint-symmetry pair",
    "pair-multiplier": "multiplier of the pair current",
    "triviality": "exit 0 when the pair current is trivial, 1 otherwise",
    "multiplier-check": "adjoint-symmetry and Helmholtz-type conditions for Q",
    "extract-multiplier": "multiplier of a conserved current C",
    "determining-system": "split determining equations for an unknown Q",
    "integrate": "current with D_i C^i = Q F by integration by parts",
    "ibragimov": "extended Lagrangian construction and its Noether current",
    "equivalence": "compare the Noether current at v = Q with the pair current",
    "corpus": "run the bundled fixtures",
}


@dataclass
class SessionConfig:
    input: Optional[str]
    command: str
    format: str = "human"
    max_order: int = DEFAULT_MAX_ORDER
    seed: int = 0
    roles: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def _global_options(p: argparse.ArgumentParser, default):
    # the subparser copies use SUPPRESS so a flag given before the command survives
    p.add_argument("--input", default=default(None), help="session file ('-' for standard input)")
    p.add_argument("--format", choices=("human", "structured"), default=default("human"))
    p.add_argument("--max-order", type=int, default=default(DEFAULT_MAX_ORDER))
    p.add_argument("--seed", type=int, default=default(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetcons", description="Conservation laws through adjoint-symmetries.")
    _global_options(parser, lambda v: v)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ROLES:
        p = sub.add_parser(name, help=HELP[name])
        _global_options(p, lambda v: argparse.SUPPRESS)
        if name != "corpus":
            p.add_argument("items", nargs="*", metavar="NAME=EXPR")
        if name == "determining-system":
            p.add_argument("--ansatz", default=None, help="comma-separated arguments of Q (default: t,x,u)")
            p.add_argument("--mode", choices=("adjoint-symmetry", "multiplier"), default="adjoint-symmetry")
            p.add_argument("--name", default="Q")
        if name == "ibragimov":
            p.add_argument("--correction", choices=("none", "xi-L"), default="none")
        if name == "corpus":
            p.add_argument("--fixture", action="append", default=None, help="run only the named fixture")
            p.add_argument("--probes", type=int, default=0, help="random identity probes per fixture")
    return parser


def _config(ns: argparse.Namespace) -> SessionConfig:
    roles = {}
    free = list(ROLES[ns.command])
    for item in getattr(ns, "items", []) or []:
        if "=" in item:
            key, value = item.split("=", 1)
            key = key.strip()
            roles[key] = value.strip()
            if key in free:
                free.remove(key)
        else:
            if not free:
                raise ShapeMismatch(f"unexpected argument {item!r}")
            roles[free.pop(0)] = item.strip()
    skip = {"input", "format", "max_order", "seed", "command", "items"}
    options = {k: v for k, v in vars(ns).items() if k not in skip}
    return SessionConfig(ns.input, ns.command, ns.format, ns.max_order, ns.seed, roles, options)


def _read_session(cfg: SessionConfig) -> Session:
    if cfg.input is None:
        raise ShapeMismatch("this command needs --input")
    text = sys.stdin.read() if cfg.input == "-" else open(cfg.input, encoding="utf-8").read()
    return parse_session(text, cfg.max_order)


# -- printing helpers ---------------------------------------------------------------

def _p(e):
    if isinstance(e, (list, tuple)):
        return [_p(c) for c in e]
    return to_dsl(e)


def _vector(e):
    """Printed form of a one-component tuple is the bare expression."""
    return _p(e[0]) if len(e) == 1 else _p(e)


def _operator(op: LinearDiffOperator) -> list:
    rows = []
    for (r, c), block in op.terms.items():
        for counts, coeff in block.items():
            index = ",".join(op.jet.independent[i] for i, k in enumerate(counts) for _ in range(k))
            rows.append({"row": r, "col": c, "D": index, "coeff": to_dsl(coeff)})
    return sorted(rows, key=lambda d: (d["row"], d["col"], sum(1 for _ in d["D"].split(",") if _), d["D"]))


# -- command bodies ------------------------------------------------------------------

def _value(session: Session, cfg: SessionConfig, key: str):
    if key not in cfg.roles:
        raise ShapeMismatch(f"missing argument {key}=...")
    return session.parse(cfg.roles[key])


def _tuple(v) -> tuple:
    return tuple(v) if isinstance(v, (list, tuple)) else (v,)


def _symmetry(session: Session, cfg: SessionConfig):
    """``P`` as given, or the characteristic of ``xi, eta``."""
    if "P" in cfg.roles:
        return _tuple(_value(session, cfg, "P"))
    if "xi" in cfg.roles and "eta" in cfg.roles:
        xi = _tuple(_value(session, cfg, "xi"))
        eta = _tuple(_value(session, cfg, "eta"))
        return characteristic_from_point_symmetry(session.jet, xi, eta)
    raise ShapeMismatch("missing argument P=... (or xi=... eta=...)")


def _chars(P) -> tuple:
    return tuple(P.P) if isinstance(P, GeneratorCharacteristic) else P


def _system(session: Session):
    if session.system is None:
        raise ShapeMismatch("the session declares no equations")
    return session.system


def _check_symmetry(session, cfg):
    sys_ = _system(session)
    P = _chars(_symmetry(session, cfg))
    res = symmetry_residual(P, sys_)
    ok = all(is_zero(r) for r in res)
    result = {"P": _vector(P)}
    if ok:
        result["operator"] = _operator(extract_symmetry_operator(P, sys_))
    return result, res, ("symmetry" if ok else "not a symmetry"), ok


def _check_adjoint_symmetry(session, cfg):
    sys_ = _system(session)
    Q = _tuple(_value(session, cfg, "Q"))
    res = adjoint_symmetry_residual(Q, sys_)
    ok, op = self_adjointness_check(sys_, Q)
    result = {"Q": _vector(Q)}
    if ok:
        result["operator"] = _operator(op)
    return result, res, ("adjoint-symmetry" if ok else "not an adjoint-symmetry"), ok


def _pair_current(session, cfg):
    sys_ = _system(session)
    P = _chars(_symmetry(session, cfg))
    Q = _tuple(_value(session, cfg, "Q"))
    cur = pair_conserved_current(P, Q, sys_)
    reduced = tuple(sys_.reduce(q) for q in cur.multiplier)
    trivial = all(is_zero(q) for q in reduced)
    result = {"current": _p(cur.components), "conserved": cur.verified, "multiplier": _vector(reduced)}
    return result, [], ("trivial" if trivial else "nontrivial"), bool(cur.verified)


def _pair_multiplier(session, cfg):
    sys_ = _system(session)
    P = _chars(_symmetry(session, cfg))
    Q = _tuple(_value(session, cfg, "Q"))
    m = pair_multiplier(P, Q, sys_)
    reduced = tuple(sys_.reduce(q) for q in m.Q)
    result = {"multiplier": _vector(m.Q), "on_shell": _vector(reduced), "order": m.order}
    trivial = all(is_zero(q) for q in reduced)
    return result, [], ("trivial" if trivial else "nontrivial"), True


def _triviality(session, cfg):
    sys_ = _system(session)
    P = _chars(_symmetry(session, cfg))
    Q = _tuple(_value(session, cfg, "Q"))
    trivial = is_trivial_pair(P, Q, sys_)
    reduced = tuple(sys_.reduce(q) for q in pair_multiplier(P, Q, sys_).Q)
    return {"multiplier": _vector(reduced)}, [], ("trivial" if trivial else "nontrivial"), trivial


def _multiplier_check(session, cfg):
    sys_ = _system(session)
    Q = _tuple(_value(session, cfg, "Q"))
    res = multiplier_residuals(Q, sys_)
    helm = {}
    for (alpha, a, counts), value in sorted(res.helmholtz.items()):
        index = ",".join(session.jet.independent[i] for i, k in enumerate(counts) for _ in range(k))
        helm[f"{session.jet.dependent[alpha]},{sys_.names[a]},[{index}]"] = to_dsl(value)
    ok = res.all_zero()
    result = {"Q": _vector(Q), "adjoint_symmetry": _p(res.adjoint_symmetry), "helmholtz": helm}
    return result, res.conditions(), ("multiplier" if ok else "not a multiplier"), ok


def _extract_multiplier(session, cfg):
    sys_ = _system(session)
    C = _tuple(_value(session, cfg, "C"))
    m = multiplier_from_current(C, sys_)
    trivial = m.is_zero()
    return {"C": _p(C), "multiplier": _vector(m.Q), "order": m.order}, [], ("trivial" if trivial else "nontrivial"), True


def _determining_system(session, cfg):
    sys_ = _system(session)
    names = (cfg.options.get("ansatz") or ",".join(session.independent + session.dependent[:1])).split(",")
    signature = [session.parse(n) for n in names]
    ds = generate_determining_system(signature, sys_, cfg.options.get("mode", "adjoint-symmetry"), cfg.options.get("name", "Q"))
    result = {"unknowns": _p(ds.unknowns), "mode": ds.mode, "count": len(ds)}
    return result, list(ds.equations), f"{len(ds)} equations", True


def _integrate(session, cfg):
    sys_ = _system(session)
    Q = _tuple(_value(session, cfg, "Q"))
    cur = integrate_characteristic(Q, sys_)
    return {"Q": _vector(Q), "current": _p(cur.components), "exact": cur.verified}, [], "integrated", bool(cur.verified)


def _ibragimov(session, cfg):
    sys_ = _system(session)
    P = _symmetry(session, cfg)
    ext = build_extended_system(sys_)
    sym = extend_symmetry(P, ext)
    invariance = variational_invariance_check(sym, ext)
    cur = noether_current(sym, ext, cfg.options.get("correction", "none"))
    result = {
        "L": to_dsl(ext.L),
        "adjoint_equations": _p(ext.adjoint_equations),
        "characteristic": _p(sym.characteristic),
        "current": _p(cur.components),
        "conserved": cur.verified,
    }
    ok = is_zero(invariance) and cur.verified is not False
    if "Q" in cfg.roles:
        Q = _tuple(_value(session, cfg, "Q"))
        at_q = tuple(substitute_adjoint_variables(c, ext, Q) for c in cur.components)
        result["current_at_Q"] = _p(at_q)
        result["equivalent"] = equivalence_check(sym.P, Q, sys_, ext)
    return result, [invariance], ("variational symmetry" if is_zero(invariance) else "not variational"), ok


def _equivalence(session, cfg):
    sys_ = _system(session)
    P = _chars(_symmetry(session, cfg))
    Q = _tuple(_value(session, cfg, "Q"))
    ok = equivalence_check(P, Q, sys_)
    return {"equivalent": ok}, [], ("equivalent" if ok else "not equivalent"), ok


def _corpus(session, cfg):
    from .corpus import load_fixtures, run_corpus

    fixtures = load_fixtures()
    wanted = cfg.options.get("fixture")
    if wanted:
        known = {f.name for f in fixtures}
        missing = [w for w in wanted if w not in known]
        if missing:
            raise ShapeMismatch(f"unknown fixture(s): {', '.join(missing)}")
        fixtures = [f for f in fixtures if f.name in wanted]
    summary = run_corpus(fixtures, probes=cfg.options.get("probes", 0), seed=cfg.seed)
    failed = [r for r in summary["results"] if not r["passed"] and not r["advisory"]]
    verdict = "all gating expectations reproduced" if not failed else f"{len(failed)} gating expectation(s) failed"
    return summary, [], verdict, not failed


BODIES = {
    "check-symmetry": _check_symmetry,
    "check-adjoint-symmetry": _check_adjoint_symmetry,
    "pair-current": _pair_current,
    "pair-multiplier": _pair_multiplier,
    "triviality": _triviality,
    "multiplier-check": _multiplier_check,
    "extract-multiplier": _extract_multiplier,
    "determining-system": _determining_system,
    "integrate": _integrate,
    "ibragimov": _ibragimov,
    "equivalence": _equivalence,
    "corpus": _corpus,
}


def execute(session: Optional[Session], cfg: SessionConfig) -> tuple:
    """``(report, exit_code)`` for one command on an already parsed session."""
    inputs = dict(sorted(cfg.roles.items()))
    if session is not None and session.system is not None:
        inputs["system"] = [to_dsl(e) for e in session.system.equations]
    for k, v in sorted(cfg.options.items()):
        if v not in (None, [], 0) or k == "probes":
            inputs[k] = v
    report = {"command": cfg.command, "inputs": inputs}
    try:
        result, residuals, verdict, ok = BODIES[cfg.command](session, cfg)
    except JetconsError as err:
        report.update(result=None, residuals=[], verdict="error", error={"code": err.code, "message": str(err)})
        return report, 2
    except (ValueError, OSError) as err:
        report.update(result=None, residuals=[], verdict="error", error={"code": "InvalidArgument", "message": str(err)})
        return report, 2
    report.update(result=result, residuals=_p(list(residuals)), verdict=verdict)
    return report, 0 if ok else 1


def run_command(cfg: SessionConfig) -> tuple:
    """Read the session named by ``cfg`` and run its command."""
    try:
        session = None if cfg.command == "corpus" else _read_session(cfg)
    except JetconsError as err:
        report = {"command": cfg.command, "inputs": dict(sorted(cfg.roles.items())), "result": None, "residuals": [],
                  "verdict": "error", "error": {"code": err.code, "message": str(err)}}
        return report, 2
    except OSError as err:
        report = {"command": cfg.command, "inputs": dict(sorted(cfg.roles.items())), "result": None, "residuals": [],
                  "verdict": "error", "error": {"code": "InputError", "message": str(err)}}
        return report, 2
    return execute(session, cfg)


def _human(value, indent: int = 0) -> list:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                sub = _human(v, indent + 1)
                lines.append(f"{pad}- " + sub[0].lstrip())
                lines.extend(sub[1:])
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def render(report: dict, fmt: str) -> str:
    if fmt == "structured":
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_human(report)) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config(ns)
    except JetconsError as err:
        report = {"command": ns.command, "inputs": {}, "result": None, "residuals": [], "verdict": "error",
                  "error": {"code": err.code, "message": str(err)}}
        sys.stdout.write(render(report, ns.format))
        return 2
    report, code = run_command(cfg)
    sys.stdout.write(render(report, cfg.format))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
