"""Exception hierarchy shared by every module.

The CLI maps :class:`PreconditionError` to exit status 2 and
:class:`DegeneracyError` to exit status 3.
"""


class CurrentsError(Exception):
    """Base class for all errors raised by :mod:`cuspcurrents`."""


class PreconditionError(CurrentsError, ValueError):
    """An input violates a documented precondition."""


class DegeneracyError(CurrentsError, ArithmeticError):
    """A computation hit a numerically or combinatorially degenerate case.

    Typical causes are geodesics lying on a wall orbit, box boundaries that
    coincide with an atom endpoint, or corner incidences of horocyclic edges.
    """
