"""Exception types shared across the package.

The split matters to the command-line front end, which maps exception
classes onto distinct exit codes: bad input is the caller's problem,
a failed mathematical check is a verification result, and anything
that signals the solver and simulator disagreeing with each other is
an internal bug.
"""

from __future__ import annotations


class UsageError(ValueError):
    """Invalid input: bad dimensions, non-positive entries, out-of-range k."""


class MonotonicityError(UsageError):
    """A hypothesis violation, not a numerical failure.

    Raised when an operation whose guarantees are proved only for
    non-increasing rate vectors is handed a non-monotone one. Solvers
    accept any positive p; the inequality verifiers and the ratio
    formula do not.
    """


class NonConvergenceError(RuntimeError):
    """Sweep iteration hit its sweep budget before reaching tolerance.

    Signals a tolerance too tight for float arithmetic, or a bug.
    """


class InternalConsistencyError(RuntimeError):
    """The package disagrees with itself: singular level system, a failed
    potential audit, an adversary invariant broken mid-run."""
