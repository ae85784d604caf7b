"""Split determining systems for Q(t, x, u) on the general semilinear wave equation."""

from jetcons import parse_session, to_dsl
from jetcons.conslaw import generate_determining_system

session = parse_session("""
vars t, x;
deps u;
funcs b(u), c(u), m(u);
unknowns Q(t, x, u);
equation F = u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] + m(u) solve u[t,t];
""")
signature = session.parse("(t, x, u)")

for mode in ("adjoint-symmetry", "multiplier"):
    ds = generate_determining_system(signature, session.system, mode=mode)
    print(f"{mode}: {len(ds)} equations")
    for eq in ds:
        print("  ", to_dsl(eq), "= 0")
