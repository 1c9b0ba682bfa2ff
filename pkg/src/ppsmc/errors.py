"""Exceptions shared across the package."""


class SaturatedCdfError(ArithmeticError):
    """1 - F underflowed to zero where a positive density remains.

    The hazard f/(1-F) is undefined past this point; callers should treat the
    model as numerically exhausted rather than silently producing inf.
    """


class IterationLimitError(RuntimeError):
    """A sampling loop exceeded its iteration cap without crossing the horizon."""
