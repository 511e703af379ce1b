"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class NCycleError(Exception):
    """Base class for every error raised on purpose by this package."""


class InvalidBoxError(NCycleError, ValueError):
    """A box (or distribution) violates shape, sign or normalization constraints."""


class DisturbanceError(InvalidBoxError):
    """The two edge marginals of one observable disagree beyond tolerance."""

    def __init__(self, observable: int, deviation: float, tol: float) -> None:
        self.observable = observable
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"Box is disturbing at observable X_{observable + 1}: "
            f"edge marginals differ by {deviation:.3e} (tol {tol:.1e})",
        )


class ParityError(NCycleError, ValueError):
    """A sign vector has the wrong parity for the requested construction."""


class SizeGuardError(NCycleError, ValueError):
    """A request exceeds a guarded problem size."""


class InconclusiveSolveError(NCycleError, RuntimeError):
    """The simplex engine stopped without a trustworthy verdict."""


class BoxDocumentError(NCycleError, ValueError):
    """A box file could not be decoded or validated."""


class InvalidOperationError(NCycleError, ValueError):
    """A local operation refers to observables or edges the box does not have."""


class UnrepresentableCertificateError(NCycleError, ValueError):
    """A certified mixture cannot be written as a box without losing its violation."""
