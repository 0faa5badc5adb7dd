"""Exact synthesis of 2x2 unitaries as at most four physical sections.

Every section Hamiltonian has the form

    [[beta_mean + detune, coupling], [coupling, beta_mean - detune]]

with strictly positive couplings and diagonal entries. A generic gate costs
four sections: Hadamard, a pure-coupling rotation, Hadamard, and a final
rotation carrying the gate's amplitude/phase structure. Diagonal (phase)
gates need three sections; the identity is two Hadamards. Free 2*pi windings
of the diagonal level and of the middle coupling are chosen to put every
parameter inside the caller's bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import expm_hermitian, require_unitary

#: Input unitarity tolerance for parsing.
PARSE_ATOL = 1e-10
#: Gates with amplitude above this are routed to the phase-gate path.
ROTATION_AMPLITUDE_LIMIT = 1.0 - 1e-9
#: Angle comparisons mod 2*pi.
ANGLE_ATOL = 1e-12

HADAMARD_ROLE = "hadamard"
COUPLER_ROLE = "coupler"
ROTATION_ROLE = "rotation"


class PhaseGateRequired(Exception):
    """Raised by rotation_section when the gate is (nearly) diagonal: the
    rotation form would need a vanishing coupling, which the hardware
    forbids. Callers must take the three-section phase-gate path."""


class BoundsInfeasible(ValueError):
    """No integer winding places a section's parameters inside the bounds."""

    def __init__(self, message: str, role: str):
        super().__init__(message)
        self.role = role


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = -((-a + np.pi) % (2.0 * np.pi) - np.pi)
    return float(w)


@dataclass(frozen=True)
class Su2GateParams:
    """Parameters of U = e^{i eta} [[r e^{i phi}, s e^{i delta}], [-s e^{-i delta}, r e^{-i phi}]]
    with s = sqrt(1 - r^2)."""

    amplitude: float    # r in [0, 1]
    top_phase: float    # phi
    off_phase: float    # delta (0 when the off-diagonal vanishes)
    global_phase: float # eta, branch (-pi/2, pi/2]

    @property
    def z_rotation(self) -> float:
        """xi = delta + pi/2; angle of the diagonal rotation factored off the gate."""
        return self.off_phase + np.pi / 2.0

    @property
    def rotation_phase(self) -> float:
        """zeta = -(phi + xi); phase of the residual rotation block."""
        return -(self.top_phase + self.z_rotation)

    @property
    def rotation_angle(self) -> float:
        """theta = arccos(r cos zeta), in (0, pi) whenever r < 1."""
        return float(np.arccos(np.clip(self.amplitude * np.cos(self.rotation_phase), -1.0, 1.0)))

    def reconstruct(self) -> np.ndarray:
        r = self.amplitude
        s = math.sqrt(max(0.0, 1.0 - r * r))
        inner = np.array(
            [
                [r * np.exp(1j * self.top_phase), s * np.exp(1j * self.off_phase)],
                [-s * np.exp(-1j * self.off_phase), r * np.exp(-1j * self.top_phase)],
            ]
        )
        return np.exp(1j * self.global_phase) * inner


def parse_su2(u, atol: float = PARSE_ATOL) -> Su2GateParams:
    """Extract (r, phi, delta, eta) from a 2x2 unitary.

    eta = arg(det U)/2 on the branch (-pi/2, pi/2]; r = |U11|. Angles of
    vanishing entries are set to zero.
    """
    u = require_unitary(u, atol=atol, what="gate")
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {u.shape}")
    eta = float(np.angle(np.linalg.det(u)) / 2.0)
    inner = u * np.exp(-1j * eta)
    r = min(1.0, float(abs(inner[0, 0])))
    phi = float(np.angle(inner[0, 0])) if r > 1e-12 else 0.0
    off = inner[0, 1]
    delta = float(np.angle(off)) if abs(off) > 1e-12 else 0.0
    return Su2GateParams(amplitude=r, top_phase=phi, off_phase=delta, global_phase=eta)


@dataclass(frozen=True)
class ParameterBounds:
    """Admissible windows for section parameters. Lower bounds are strict
    (positivity is a hard hardware constraint); upper bounds are inclusive."""

    beta_min: float = 0.0
    beta_max: float = math.inf
    kappa_min: float = 0.0
    kappa_max: float = math.inf

    def __post_init__(self):
        if not self.beta_min < self.beta_max:
            raise ValueError("empty beta window")
        if not self.kappa_min < self.kappa_max:
            raise ValueError("empty kappa window")
        if self.beta_min < 0.0 or self.kappa_min < 0.0:
            raise ValueError("lower bounds below zero would violate positivity")


@dataclass(frozen=True)
class Su2Section:
    """One physical section of the four-section synthesis.

    The Hamiltonian is beta_mean on the diagonal split by +-detune, with
    ``coupling`` off-diagonal. ``phase_winding`` is the 2*pi multiple folded
    into beta_mean; ``coupling_winding`` the one folded into the coupling
    (middle sections only).
    """

    beta_mean: float
    detune: float
    coupling: float
    length: float
    phase_winding: int
    coupling_winding: int | None
    role: str

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("section length must be positive")
        if not self.coupling > 0.0:
            raise ValueError(f"coupling must be strictly positive, got {self.coupling!r}")
        if not (self.beta_top > 0.0 and self.beta_bottom > 0.0):
            raise ValueError(
                f"diagonal levels must be strictly positive, got "
                f"({self.beta_top!r}, {self.beta_bottom!r})"
            )

    @property
    def beta_top(self) -> float:
        return self.beta_mean + self.detune

    @property
    def beta_bottom(self) -> float:
        return self.beta_mean - self.detune

    def hamiltonian(self) -> np.ndarray:
        return np.array(
            [[self.beta_top, self.coupling], [self.coupling, self.beta_bottom]], dtype=complex
        )

    def unitary(self) -> np.ndarray:
        return expm_hermitian(self.hamiltonian(), self.length)


def _wind_mean_level(
    phase: float, half_span: float, length: float, bounds: ParameterBounds, role: str
) -> tuple[float, int]:
    """Smallest integer k with (-phase + 2 pi k)/length +- half_span inside the beta window."""
    low = bounds.beta_min + half_span
    k = math.floor((low * length + phase) / (2.0 * math.pi)) + 1
    value = (-phase + 2.0 * math.pi * k) / length
    while not value - half_span > bounds.beta_min:  # guard against rounding at the boundary
        k += 1
        value = (-phase + 2.0 * math.pi * k) / length
    if value + half_span > bounds.beta_max:
        raise BoundsInfeasible(
            f"{role}: no 2*pi winding places the diagonal levels inside "
            f"({bounds.beta_min:g}, {bounds.beta_max:g}]",
            role,
        )
    return value, k


def _wind_coupling(
    angle: float, length: float, bounds: ParameterBounds, role: str
) -> tuple[float, int]:
    """Smallest integer l with (angle + 2 pi l)/length inside the kappa window."""
    l = math.floor((bounds.kappa_min * length - angle) / (2.0 * math.pi)) + 1
    value = (angle + 2.0 * math.pi * l) / length
    while not value > bounds.kappa_min:
        l += 1
        value = (angle + 2.0 * math.pi * l) / length
    if value > bounds.kappa_max:
        raise BoundsInfeasible(
            f"{role}: no 2*pi winding places the coupling inside "
            f"({bounds.kappa_min:g}, {bounds.kappa_max:g}]",
            role,
        )
    return value, l


def hadamard_section(length: float, bounds: ParameterBounds | None = None) -> Su2Section:
    """Single section realizing the Hadamard gate exactly:
    detune = coupling = pi/(2 sqrt(2) L), mean level set so e^{-i beta L} = e^{i pi/2}."""
    bounds = bounds or ParameterBounds()
    half = np.pi / (2.0 * np.sqrt(2.0) * length)
    if not bounds.kappa_min < half <= bounds.kappa_max:
        raise BoundsInfeasible(
            f"hadamard: fixed coupling {half:g} outside the kappa window", HADAMARD_ROLE
        )
    mean, k = _wind_mean_level(np.pi / 2.0, half, length, bounds, HADAMARD_ROLE)
    return Su2Section(
        beta_mean=mean,
        detune=half,
        coupling=half,
        length=length,
        phase_winding=k,
        coupling_winding=None,
        role=HADAMARD_ROLE,
    )


def _coupler_section(
    xi: float, folded_phase: float, length: float, bounds: ParameterBounds
) -> Su2Section:
    """Pure-coupling section: e^{i folded_phase} Rx(xi) with Rx(xi) = e^{-i xi sigma_x}."""
    kappa, l = _wind_coupling(xi, length, bounds, COUPLER_ROLE)
    mean, k = _wind_mean_level(folded_phase, 0.0, length, bounds, COUPLER_ROLE)
    return Su2Section(
        beta_mean=mean,
        detune=0.0,
        coupling=kappa,
        length=length,
        phase_winding=k,
        coupling_winding=l,
        role=COUPLER_ROLE,
    )


def rotation_section(
    params: Su2GateParams, length: float, bounds: ParameterBounds | None = None
) -> Su2Section:
    """Section realizing e^{i eta} R(r, zeta, pi/2) exactly.

    coupling = sqrt(1-r^2) theta / (L sin theta) and
    detune = r sin(zeta) coupling / sqrt(1-r^2); both follow from matching
    the axis-angle form of e^{-iHL} entry by entry. Raises PhaseGateRequired
    when r is too close to 1 for a strictly positive coupling.
    """
    bounds = bounds or ParameterBounds()
    r = params.amplitude
    if r >= ROTATION_AMPLITUDE_LIMIT:
        raise PhaseGateRequired(
            f"amplitude {r!r} too close to 1; use the three-section phase-gate path"
        )
    theta = params.rotation_angle
    root = math.sqrt(1.0 - r * r)
    coupling = root * theta / (length * math.sin(theta))
    detune = r * math.sin(params.rotation_phase) * coupling / root
    if not bounds.kappa_min < coupling <= bounds.kappa_max:
        raise BoundsInfeasible(
            f"rotation: fixed coupling {coupling:g} outside the kappa window", ROTATION_ROLE
        )
    mean, k = _wind_mean_level(params.global_phase, abs(detune), length, bounds, ROTATION_ROLE)
    return Su2Section(
        beta_mean=mean,
        detune=detune,
        coupling=coupling,
        length=length,
        phase_winding=k,
        coupling_winding=None,
        role=ROTATION_ROLE,
    )


def synthesize_su2(
    u, length: float, bounds: ParameterBounds | None = None
) -> list[Su2Section]:
    """Synthesize a 2x2 unitary as <= 4 sections, exact including global phase.

    Returned sections are in physical order (first applied first); the
    reverse-order product of their unitaries equals ``u``. Generic gates take
    [Hadamard, coupler(xi), Hadamard, rotation]; diagonal gates take
    [Hadamard, coupler, Hadamard] with the global phase folded into the
    middle section; the identity takes two Hadamards.
    """
    if length <= 0.0:
        raise ValueError("section length must be positive")
    bounds = bounds or ParameterBounds()
    params = parse_su2(u)
    if params.amplitude >= ROTATION_AMPLITUDE_LIMIT:
        xi = _wrap_angle(-params.top_phase)
        eta = params.global_phase
        if abs(xi) <= ANGLE_ATOL and abs(eta) <= ANGLE_ATOL:
            return [hadamard_section(length, bounds), hadamard_section(length, bounds)]
        return [
            hadamard_section(length, bounds),
            _coupler_section(xi, eta, length, bounds),
            hadamard_section(length, bounds),
        ]
    return [
        hadamard_section(length, bounds),
        _coupler_section(_wrap_angle(params.z_rotation), 0.0, length, bounds),
        hadamard_section(length, bounds),
        rotation_section(params, length, bounds),
    ]


def sections_unitary(sections: list[Su2Section]) -> np.ndarray:
    """Reverse-order product of section unitaries (first section applied first)."""
    u = np.eye(2, dtype=complex)
    for section in sections:
        u = section.unitary() @ u
    return u
