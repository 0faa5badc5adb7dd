"""Canonical target unitaries: DFT, clock and shift matrices plus named 2x2 gates.

Basis indexing here is the 0-based computational basis {|0>, ..., |d-1>};
waveguide modes elsewhere in the package are 1-based {|1>, ..., |d>}.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import haar_random_unitary

#: Emitted gates are unitary to well below this tolerance.
GATE_ATOL = 1e-12


def _require_dimension(d: int, minimum: int = 2) -> int:
    if not isinstance(d, (int, np.integer)) or d < minimum:
        raise ValueError(f"gate dimension must be an integer >= {minimum}, got {d!r}")
    return int(d)


def dft(d: int) -> np.ndarray:
    """DFT matrix with entries omega^{(d-j)k} / sqrt(d), 0-based j, k, omega = e^{2 pi i/d}."""
    d = _require_dimension(d)
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    exponent = ((d - j) * k) % d
    return np.exp(2j * np.pi * exponent / d) / np.sqrt(d)


def clock(d: int) -> np.ndarray:
    """Diagonal clock matrix Z_d = diag(omega^k)."""
    d = _require_dimension(d)
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def shift(d: int) -> np.ndarray:
    """Cyclic shift matrix X_d mapping |k> to |k+1 mod d>."""
    d = _require_dimension(d)
    x = np.zeros((d, d), dtype=complex)
    x[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    return x


def identity(d: int) -> np.ndarray:
    return np.eye(_require_dimension(d, minimum=1), dtype=complex)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def pauli_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


class GateKind(str, enum.Enum):
    DFT = "dft"
    CLOCK = "clock"
    SHIFT = "shift"
    IDENTITY = "identity"
    HADAMARD = "hadamard"
    PAULI_X = "pauli-x"


_TWO_MODE_ONLY = {GateKind.HADAMARD, GateKind.PAULI_X}


@dataclass(frozen=True)
class NamedGate:
    kind: GateKind
    dimension: int

    def __post_init__(self):
        if self.kind in _TWO_MODE_ONLY:
            if self.dimension != 2:
                raise ValueError(f"{self.kind.value} is a 2x2 gate, got d={self.dimension}")
        else:
            _require_dimension(self.dimension, minimum=1 if self.kind is GateKind.IDENTITY else 2)

    def matrix(self) -> np.ndarray:
        if self.kind is GateKind.DFT:
            return dft(self.dimension)
        if self.kind is GateKind.CLOCK:
            return clock(self.dimension)
        if self.kind is GateKind.SHIFT:
            return shift(self.dimension)
        if self.kind is GateKind.IDENTITY:
            return identity(self.dimension)
        if self.kind is GateKind.HADAMARD:
            return hadamard()
        return pauli_x()


def named_gate(name: str, dimension: int) -> np.ndarray:
    """Resolve a CLI gate string: one of the named kinds, or "haar:<seed>"."""
    name = name.strip().lower()
    if name.startswith("haar:"):
        try:
            seed = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad Haar gate spec {name!r}, expected haar:<seed>") from None
        return haar_random_unitary(dimension, seed)
    try:
        kind = GateKind(name)
    except ValueError:
        valid = ", ".join(k.value for k in GateKind)
        raise ValueError(f"unknown gate {name!r}; expected one of {valid} or haar:<seed>") from None
    return NamedGate(kind, dimension).matrix()
