"""The exponential adjoint-symmetry exp(t + x) of u_tt - u_xx + u u_t + u u_x + u^2.

Pairing it with the two translations gives multipliers D_t Q and D_x Q, so
the pair currents are nontrivial.  The Noether current of the extended
Lagrangian v F, evaluated at v = Q, agrees with the pair current.
"""

from jetcons import parse_session, to_dsl
from jetcons.conslaw import adjoint_symmetry_residual, pair_conserved_current, pair_multiplier
from jetcons.ibragimov import build_extended_system, equivalence_check

session = parse_session("""
vars t, x;
deps u;
equation F = u[t,t] - u[x,x] + u*u[t] + u*u[x] + u^2 solve u[t,t];
""")
system = session.system
Q = session.parse("exp(t + x)")
print("adjoint-symmetry residual:", adjoint_symmetry_residual(Q, system))

for name in ("-u[t]", "-u[x]"):
    P = session.parse(name)
    m = pair_multiplier(P, Q, system)
    cur = pair_conserved_current(P, Q, system)
    print(f"P = {name}")
    print("  multiplier on shell:", to_dsl(system.reduce(m.Q[0])))
    print("  current:", to_dsl(cur.components), "conserved:", cur.verified)
    print("  same as the Noether current at v = Q:", equivalence_check(P, Q, system))

ext = build_extended_system(system)
print("extended Lagrangian:", to_dsl(ext.L))
