"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto its exit-code contract: usage/parse problems exit
with 2, numerical failures with 3.
"""

from __future__ import annotations


class CmsDiscError(Exception):
    """Base class for every error raised by cmsdisc."""


class ConfigError(CmsDiscError, ValueError):
    """Invalid configuration value (defaults file or environment)."""


class IndexOutOfRange(CmsDiscError, ValueError):
    """An order or node index lies outside the supported range."""


class KindMismatch(CmsDiscError, ValueError):
    """Two objects live in different Chebyshev bases or moment families."""


# Moment sequences use the same error; the name reads better at call sites.
MomentKindMismatch = KindMismatch


class InsufficientMoments(CmsDiscError, ValueError):
    """A bound needs more moments than the sequence provides."""


class MeasureFormatError(CmsDiscError, ValueError):
    """A measure is malformed (bad file, bad atoms, bad weights)."""


class IllConditioned(CmsDiscError, ArithmeticError):
    """Linear-system residual too large for double precision."""


class NoConvergence(CmsDiscError, ArithmeticError):
    """An iterative eigenvalue solver did not converge."""


NUMERICAL_ERRORS = (IllConditioned, NoConvergence)
USAGE_ERRORS = (
    ConfigError,
    IndexOutOfRange,
    KindMismatch,
    InsufficientMoments,
    MeasureFormatError,
)
