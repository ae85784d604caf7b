"""Local conservation laws of differential equations through adjoint-symmetries.

The kernel works in jet space: expressions are sympy objects over jet
coordinates ``u[t,x]``, registered functions ``b(u)`` and unknown functions
``Q(t,x,u)``.  On top of it sit the variational operators, systems in solved
form with on-shell reduction, the symmetry / adjoint-symmetry pair formula,
multiplier determining systems and the extended Lagrangian ``L = v F``.
"""

from .conslaw import *  # noqa: F401,F403
from .desystem import *  # noqa: F401,F403
from .dsl import parse_expression, parse_session, to_dsl
from .errors import JetconsError
from .expr import *  # noqa: F401,F403
from .ibragimov import *  # noqa: F401,F403
from .jet import GeneratorCharacteristic, JetSpace, characteristic_from_point_symmetry
from .variational import *  # noqa: F401,F403

__version__ = "0.1.0"
