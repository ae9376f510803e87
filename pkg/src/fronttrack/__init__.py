"""Wave front tracking for hyperbolic initial-boundary value problems with a characteristic boundary."""

__version__ = "0.1.0"
