"""Exceptions shared across the package."""


class InputError(ValueError):
    """Malformed user input: unknown generators, bad files, bad matrices."""


class BudgetError(RuntimeError):
    """A search or enumeration exceeded its configured budget.

    Raised instead of ever returning a possibly-wrong answer.  The CLI maps
    this to exit code 2.
    """
