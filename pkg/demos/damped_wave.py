"""Walk through the damped wave equation u_tt - u_xx + b(u) u_t + c(u) u_x = 0.

Q = 1 is a multiplier.  Integrating it gives a conserved current, the
current gives the multiplier back, and pairing Q = 1 with a translation
only produces a trivial current.
"""

from jetcons import parse_session, to_dsl
from jetcons.conslaw import (
    integrate_characteristic,
    is_trivial_pair,
    multiplier_from_current,
    multiplier_residuals,
    pair_conserved_current,
)

session = parse_session("""
vars t, x;
deps u;
funcs b(u), c(u);
equation F = u[t,t] - u[x,x] + b(u)*u[t] + c(u)*u[x] solve u[t,t];
""")
system = session.system
one = session.parse("1")

print("multiplier conditions hold:", multiplier_residuals(one, system).all_zero())

current = integrate_characteristic(one, system)
print("current:", to_dsl(current.components))
print("multiplier of that current:", to_dsl(multiplier_from_current(current.components, system).Q[0]))

P = session.parse("-u[t]")
pair = pair_conserved_current(P, one, system)
print("pair current with the time translation:", to_dsl(pair.components))
print("trivial:", is_trivial_pair(P, one, system))
