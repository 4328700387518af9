"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class TwistbenchError(Exception):
    """Base class for every error raised by this package."""


class InputError(TwistbenchError, ValueError):
    """An argument violates a documented precondition."""


class SizingError(InputError):
    """A geometric construction does not fit into the requested region."""


class PreconditionError(InputError):
    """A closed-form bound was asked for outside its range of validity."""


class LocalityError(InputError):
    """A circuit gate acts on sites further apart than the locality radius."""

    def __init__(self, message, gate=None, distance=None):
        super().__init__(message)
        self.gate = gate
        self.distance = distance


class CircuitParseError(InputError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CapacityError(TwistbenchError):
    """Dense computation requested above the configured qubit cap."""


class FrustratedError(TwistbenchError):
    """A projector Hamiltonian has no common zero-energy ground state."""

    def __init__(self, message, eigenvalue=None, eigenvector=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.eigenvector = eigenvector
