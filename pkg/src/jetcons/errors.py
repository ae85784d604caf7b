"""Exception hierarchy.

Every error carries a stable ``code`` string; the command line reports it
verbatim and exits with status 2.
"""


class JetconsError(Exception):
    code = "Error"


class DepthExceeded(JetconsError):
    code = "DepthExceeded"


class CyclicBinding(JetconsError):
    code = "CyclicBinding"


class NotPolynomial(JetconsError):
    code = "NotPolynomial"


class OrderOverflow(JetconsError):
    code = "OrderOverflow"


class NotPointForm(JetconsError):
    code = "NotPointForm"


class ShapeMismatch(JetconsError):
    code = "ShapeMismatch"


class NonTerminating(JetconsError):
    code = "NonTerminating"


class LeadingDerivativeInvalid(JetconsError):
    code = "LeadingDerivativeInvalid"


class NotASymmetry(JetconsError):
    code = "NotASymmetry"


class NotAnAdjointSymmetry(JetconsError):
    code = "NotAnAdjointSymmetry"


class NotConserved(JetconsError):
    code = "NotConserved"


class IntegrationIncomplete(JetconsError):
    code = "IntegrationIncomplete"


class MissingPointForm(JetconsError):
    code = "MissingPointForm"


class SingularOnShell(JetconsError):
    code = "SingularOnShell"


class DSLSyntaxError(JetconsError):
    code = "SyntaxError"

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownSymbol(JetconsError):
    code = "UnknownSymbol"


class FixtureCorrupt(JetconsError):
    code = "FixtureCorrupt"
