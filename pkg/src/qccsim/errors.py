"""Exception hierarchy for the simulator.

The CLI maps these to distinct exit codes: validation failures to 3,
capacity overruns to 4, numerical edge cases to 5.
"""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ValidationError(SimulationError):
    """A value violates a documented precondition or invariant."""


class DimensionMismatch(ValidationError):
    """Operands address incompatible subsystem dimensions or labels."""


class CapacityError(SimulationError):
    """A requested allocation exceeds the configured amplitude limit."""


class NumericalError(SimulationError):
    """A computation is undefined for the given, otherwise valid, inputs."""


class OrthogonalPostselection(NumericalError):
    """Postselection overlap is numerically zero; the weak value is undefined.

    The transition element remains available, letting callers tell
    "weak value undefined" apart from "weak value zero".
    """


class NegativeRadicand(NumericalError):
    """Intensity inversion hit a negative radicand.

    Signals a statistically impossible ratio / projector-weak-value
    combination fed to the spin-modulus inference.
    """
