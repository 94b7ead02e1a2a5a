"""Exception types shared across the toolkit.

Every domain error derives from :class:`RealizabilityError` so callers can
catch the whole family at once (the CLI maps them to exit code 3 unless a
command defines something more specific).
"""


class RealizabilityError(Exception):
    """Base class for all domain errors raised by this package."""


# --- finite-dimensional moment sequences ---

class DimensionMismatch(RealizabilityError):
    """Objects live over different ambient dimensions."""


class DegreeOverflow(RealizabilityError):
    """A polynomial degree or matrix level exceeds the available truncation."""


class IncompleteSequence(RealizabilityError):
    """A moment sequence is missing entries below its truncation degree."""


class NegativeMass(RealizabilityError):
    """The zeroth moment is negative; no non-negative measure can realize it."""


class NotSymmetric(RealizabilityError):
    """A matrix or coefficient tensor fails its symmetry requirement."""


class NegativeEvenMoment(RealizabilityError):
    """A diagonal even-order moment is negative."""


# --- positive sequences / quasi-analyticity ---

class NonPositiveTerm(RealizabilityError):
    """A sequence term is zero or negative where positivity is required."""


class InsufficientTerms(RealizabilityError):
    """Not enough sequence terms are available for the requested analysis."""


class NonPositiveScale(RealizabilityError):
    """Scaling factor must be strictly positive."""


class NotDecreasing(RealizabilityError):
    """Input sequence must be non-increasing."""


class TailNotComputable(RealizabilityError):
    """The sequence carries no usable tail-sum rule."""


class SequenceIsQuasiAnalytic(RealizabilityError):
    """A construction requires a sequence that is *not* quasi-analytic."""


class NotLogConvexWarning(UserWarning):
    """Advisory: an operation expected a log-convex input but got something else."""


# --- field (grid) moment tensors ---

class OrderOverflow(RealizabilityError):
    """A tensor order exceeds the available truncation order."""


class GridMismatch(RealizabilityError):
    """Objects live on different grids."""


class NegativePhi(RealizabilityError):
    """A constraint test function claimed non-negative has a negative value."""


class NonPositiveC(RealizabilityError):
    """The density bound c must be strictly positive."""


class NoDensity(RealizabilityError):
    """The tensor sequence carries no density interpretation."""


class NegativeContraction(RealizabilityError):
    """A weighted even-order contraction came out negative (corrupt input)."""


class WeightBelowOne(RealizabilityError):
    """A weight function dipped below 1 on an evaluation point."""


class MissingOrder(RealizabilityError):
    """A per-order input is missing a required order."""


class TensorTooLarge(RealizabilityError):
    """A dense tensor or matrix would exceed the desk-scale size wall."""


# --- sampled functions / Sobolev norms ---

class LatticeTooCoarse(RealizabilityError):
    """The lattice has too few nodes for the requested difference order."""


class SupportNotCompact(RealizabilityError):
    """Sampled values are nonzero on the lattice boundary."""


class DerivativeBoundViolated(RealizabilityError):
    """A sampled finite-difference magnitude exceeds its certified bound."""


class UnsupportedFamily(RealizabilityError):
    """The weight function is outside the named families this operation handles."""


# --- oracle ---

class IndexOutOfRange(RealizabilityError):
    """Perturbation target does not exist in the sequence."""
