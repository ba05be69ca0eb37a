"""Exception hierarchy shared by all modules."""

import numpy as np


class OreyError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(OreyError, ValueError):
    """A model or routine parameter is outside its admissible range."""


class DomainError(OreyError, ValueError):
    """An argument (time, step, ratio) lies outside the function's domain."""


class SizeError(ParameterError):
    """A partition or grid is too small."""


class AlignmentError(OreyError, ValueError):
    """A stride does not divide the number of partition steps."""


class NotAvailableError(OreyError):
    """The requested quantity is not available for this process family."""


class NestingError(OreyError, ValueError):
    """Partitions handed to the estimator are not nested."""


class DegeneratePathError(OreyError, ValueError):
    """A path has zero second-order variation on some partition."""


class ScaleSeparationError(OreyError, ValueError):
    """Fine minimal step equals coarse maximal step; the log-scale vanishes."""


class NumericalPSDError(OreyError, np.linalg.LinAlgError):
    """Cholesky factorisation failed even after the largest jitter."""

    def __init__(self, message, pivot=None, jitter=None):
        super().__init__(message)
        self.pivot = pivot
        self.jitter = jitter
