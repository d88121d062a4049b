"""Exception hierarchy shared by every module of the toolkit."""


class QPartialError(ValueError):
    """Base class for all toolkit errors."""


class NonDivisible(QPartialError):
    """The block count does not divide the item count."""


class Degenerate(QPartialError):
    """The geometry violates t < K, tau < b or t*tau < N."""


class OutOfDomain(QPartialError):
    """An asymptotic parameter lies outside the region where the formulas hold."""


class NoMinimum(QPartialError):
    """The numeric minimizer could not bracket an interior minimum."""


class FractionalParity(QPartialError):
    """Fractional global iterations requested on a state with weight on the
    parity (-1)**j1 direction, where a non-integer power is ambiguous."""


class TooLarge(QPartialError):
    """The dense simulator refuses an item count above its cap."""


class Infeasible(QPartialError):
    """No phase pair (theta, phi) can annihilate the non-target blocks."""


class SingularX(QPartialError):
    """x == 0 while z != 0: the oracle-phase term cannot act on the condition."""


class DegenerateZ(QPartialError):
    """z == 0: non-target blocks are already empty before the final operator.

    ``solution`` carries the trivial p = 0 answer (theta = phi = 0).
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class Exhausted(QPartialError):
    """No feasible sure-success schedule within the search bound."""
