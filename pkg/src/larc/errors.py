"""Exception taxonomy shared across the toolkit.

Contract violations (bad shapes, invalid arguments) raise plain
``ValueError``; the classes below mark *algorithmic* outcomes that callers
are expected to catch and act on (split a target, accept a best-effort
result, report a nonzero exit code).
"""


class LarcError(Exception):
    """Base class for all toolkit-specific errors."""


class ConfigError(LarcError):
    """Configuration or input file failed to parse or validate."""


class InvariantViolation(LarcError):
    """A value failed its construction invariant (non-unitary, non-Hermitian, ...)."""


class EigendecompositionError(LarcError):
    """The underlying eigensolver did not converge."""


class BranchCut(LarcError):
    """Principal matrix logarithm undefined: an eigenvalue sits at/near -1.

    Callers split the target (synthesize works on a square root instead).
    """


class BudgetExceeded(LarcError):
    """A bounded search ran out of candidates.

    Carries the best candidate seen so that callers can return a
    best-effort result.
    """

    def __init__(self, message, best=None, best_error=None, tried=None):
        super().__init__(message)
        self.best = best
        self.best_error = best_error
        self.tried = tried


class NoConvergence(LarcError):
    """Newton iteration stagnated above the requested tolerance."""


class BoundaryHit(LarcError):
    """Local solve converged onto the nonnegativity boundary with residual error."""


class ChartFailure(LarcError):
    """Chart construction failed (conjugator search exhausted or singular Jacobian)."""


class MembershipRejected(LarcError):
    """Target could not be certified as a member of the computed group.

    Either the target genuinely lies outside, or a branch-cut pathology of
    a proper subgroup prevented certification.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MixedSupport(LarcError):
    """Exact string oracle declined: a generator is a nontrivial sum of strings."""
