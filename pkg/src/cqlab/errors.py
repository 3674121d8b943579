"""Typed failure modes shared across the package."""

from __future__ import annotations


class CqlabError(Exception):
    """Base class for all package-specific failures."""


class ValidationError(CqlabError):
    """Input rejected before any numerics ran (bad shapes, units, config keys)."""


class CausticError(CqlabError):
    """Single-valued phase-space sheet broke down during evolution.

    Carries the first time at which the detector fired and which test fired.
    """

    def __init__(self, message: str, time: float, reason: str):
        super().__init__(message)
        self.time = time
        self.reason = reason


class PhaseNodeError(CqlabError):
    """Wavefunction amplitude vanished where a single-valued phase was required."""

    def __init__(self, message: str, locations=None):
        super().__init__(message)
        self.locations = locations


class VortexError(CqlabError):
    """2D phase unwrapping found a nonzero plaquette winding (phase vortex)."""

    def __init__(self, message: str, plaquettes=None):
        super().__init__(message)
        self.plaquettes = plaquettes


class UnsupportedPotentialError(CqlabError):
    """Requested evolution is outside the family the solver supports."""


class UnsupportedObservableError(CqlabError):
    """Observable is not expressible in the requested (classical) form."""


class ZeroCaptureError(CqlabError):
    """Conditioning window captured (numerically) zero probability."""


class NonConvergenceError(CqlabError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CoverageError(CqlabError):
    """A target grid does not cover the data it must represent.

    Carries the mass that fell outside the covered range.
    """

    def __init__(self, message: str, overflow_mass: float):
        super().__init__(message)
        self.overflow_mass = overflow_mass
