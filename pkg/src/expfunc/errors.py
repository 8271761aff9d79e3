"""Exception types raised across the package.

Every mathematical rejection carries enough context to reproduce the
failing check.  The command line maps :class:`MathematicalRejection`
subclasses to exit code 2 and everything else to exit code 1.
"""

from __future__ import annotations


class ExpFuncError(Exception):
    """Base class for all package errors."""


class MathematicalRejection(ExpFuncError):
    """A well-posed input that fails a mathematical precondition."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SmallJumpsNotIntegrable(MathematicalRejection):
    """The measure does not integrate ``min(1, x**2)`` or ``|x|`` near 0."""


class MeanUndefined(MathematicalRejection):
    """Both one-sided first moments beyond 1 are infinite."""


class NotStationary(MathematicalRejection):
    """A COGARCH parameter set violates the stationarity condition."""


class PreconditionViolated(MathematicalRejection):
    """An operation was called outside its domain of validity."""


class NotAnchoredAtZero(MathematicalRejection):
    """A candidate Bernstein function does not vanish at the origin."""


class EvaluationFailed(ExpFuncError):
    """A callable returned NaN or infinity on the evaluation grid."""


class DensityUnavailable(MathematicalRejection):
    """A Bernstein representation has no density to test."""


class KUnavailable(MathematicalRejection):
    """A Bernstein representation has no k-function."""


class NotSelfdecomposableRepr(MathematicalRejection):
    """A k-function is not non-increasing."""


class LogMomentInfinite(MathematicalRejection):
    """The driving measure has an infinite logarithmic moment."""


class RepresentationNotRecoverable(MathematicalRejection):
    """A Stieltjes measure cannot be read off the given k-function."""


class TailNotSummable(MathematicalRejection):
    """A series of c-factor exponents does not converge."""


class IntegralDiverged(MathematicalRejection):
    """A jump integral did not converge to the requested tolerance."""


class UnsupportedProcess(ExpFuncError):
    """The process lies outside the class a solver handles."""


class NotCM(MathematicalRejection):
    """A function expected to be completely monotone failed the test."""


class GridTooCoarse(ExpFuncError):
    """The grid cannot resolve a feature of the kernel."""


class TruncationBudgetExceeded(ExpFuncError):
    """A simulated path did not reach the stopping rule within budget."""


class NotConverged(ExpFuncError):
    """An iteration stopped before reaching its tolerance."""


class EdgeConditionViolated(MathematicalRejection):
    """A boundary limit required by a profile test does not hold."""


class DriftCompensationTooSmall(MathematicalRejection):
    """Thinning jumps without enough added drift leaves the range."""


class SingularAtLeftEdge(ExpFuncError):
    """The first marching step cannot be solved stably."""


class FactorNotCompoundPoisson(MathematicalRejection):
    """A c-factor has infinite Lévy mass, so it is not compound Poisson."""


class ZeroGaussianPart(MathematicalRejection):
    """Normalisation by the Gaussian variance needs ``sigma2 > 0``."""
