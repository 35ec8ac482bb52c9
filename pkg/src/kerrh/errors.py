"""Exception hierarchy shared by every kerrh module."""


class KerrhError(Exception):
    """Base class for all library errors."""


class AxisOrHorizonProximity(KerrhError):
    """A sample point lies inside the axis or horizon guard band."""


class UnsupportedOrder(KerrhError):
    """A derivative was requested beyond the order carried by a jet."""


class DivisionNearZero(KerrhError):
    """A normalising denominator is too small to divide by safely."""


class UnknownSuite(KerrhError):
    """The requested verification suite is not registered."""


class GridInvalid(KerrhError):
    """A grid specification is empty or violates its invariants."""


class UnknownQuantity(KerrhError):
    """The requested background quantity has no evaluator."""


class PointRejected(KerrhError):
    """A CLI point was rejected by the chart guards."""


class SignatureMismatch(KerrhError):
    """Two conformally weighted quantities of different signature were combined."""


class ModeMismatch(KerrhError):
    """Two mode fields with different (omega, m_phi) were added."""
