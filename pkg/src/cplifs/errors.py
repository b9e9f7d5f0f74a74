"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems exit 2,
budget or cap problems exit 3, numeric failures exit 4.
"""


class CplifsError(Exception):
    """Base class for all package errors."""


class InvalidConfig(CplifsError):
    """Raised when raw parameters violate the CPLIFS constraints.

    ``violations`` holds every :class:`~cplifs.ifs_core.Violation` found, not
    just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations) or "invalid configuration"
        super().__init__(msg)


class TypeMismatch(CplifsError):
    """Two systems with a different number of maps were compared."""


class BudgetExceeded(CplifsError):
    """An enumeration would exceed the configured work budget."""


class CapReached(CplifsError):
    """A graph construction hit its node or level cap."""


class NumericFailure(CplifsError):
    """Base class for numeric failures (exit code 4)."""


class NoConvergence(NumericFailure):
    pass


class BracketFailure(NumericFailure):
    pass


class DegenerateFit(NumericFailure):
    pass


class FormulaMismatch(NumericFailure):
    pass


class InfeasiblePerturbation(CplifsError):
    pass
