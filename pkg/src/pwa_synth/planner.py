"""Trotter planning: turn embedded 2-mode sections into physical cascades.

Each synthesized 2x2 section, embedded at modes (m, m+1) of a d-mode array,
becomes N alternating pairs: a drive section A carrying the 2x2 block on top
of a uniform positive background, and a recurrence section B equal to the
bare background. The pair implements e^{-i(A-B)L} in the large-N limit; the
backward evolution e^{+iB L/N} is realized as forward propagation over the
recurrence length q - L/N, with q certified by simultaneous Diophantine
approximation of the background eigenvalues. Electrode gaps around B
sections are compensated exactly because everything uniform commutes.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .lattice import DiophantineResult, simultaneous_diophantine
from .linalg import (
    TridiagonalHamiltonian,
    operator_norm,
    require_unitary,
    toeplitz_eigenvalues,
    toeplitz_eigenvectors,
)
from .reck import adjacent_expand, count_sections, two_level_decompose
from .su2 import ParameterBounds, Su2Section, synthesize_su2

SECTION_A = "A"
SECTION_B = "B"
SECTION_GAP = "gap"

PLAN_SCHEMA_VERSION = 1


class PlanError(RuntimeError):
    """Planning failed structurally (e.g. no usable recurrence length)."""


class GapInfeasible(ValueError):
    """Gap compensation drove a background parameter non-positive; use larger
    background windings or a smaller gap."""


@functools.lru_cache(maxsize=None)
def _cached_recurrence(d: int, eps: float) -> DiophantineResult:
    return simultaneous_diophantine(tuple(toeplitz_eigenvalues(d)), eps)


@dataclass(frozen=True)
class TrotterConfig:
    """Resolved background design shared by every planned pair.

    background_coupling = 2 pi j1 and background_beta = 2 pi j2 / q make the
    background evolution over the recurrence length q - L/N equal to the
    backward step e^{+iB L/N} up to the certified residuals.
    """

    dimension: int
    section_length: float
    trotter_steps: int
    j1: int
    j2: int
    epsilon: float
    recurrence: DiophantineResult
    recurrence_unit: float = 1.0

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("need at least two modes")
        if self.section_length <= 0.0:
            raise ValueError("section length must be positive")
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be a positive integer")
        if self.j1 < 1 or self.j2 < 1:
            raise ValueError("background windings j1, j2 must be positive integers")
        if self.recurrence_unit <= 0.0:
            raise ValueError("recurrence unit must be positive")
        budget = self.epsilon_budget(self.dimension, self.section_length, self.trotter_steps, self.j1)
        if self.epsilon > budget * (1.0 + 1e-12):
            raise ValueError(
                f"epsilon {self.epsilon:g} exceeds the budget L^2/(2 pi j1 d N^2) = {budget:g}"
            )
        if self.recurrence.epsilon > self.epsilon:
            raise ValueError("recurrence certificate is looser than the configured epsilon")

    @staticmethod
    def epsilon_budget(d: int, section_length: float, trotter_steps: int, j1: int = 1) -> float:
        """Largest Diophantine epsilon that keeps the recurrence error below
        the Trotter error: L^2 / (2 pi j1 d N^2)."""
        return section_length**2 / (2.0 * math.pi * j1 * d * trotter_steps**2)

    @classmethod
    def plan(
        cls,
        dimension: int,
        section_length: float,
        trotter_steps: int,
        j1: int = 1,
        j2: int = 1,
        epsilon: float | None = None,
        recurrence_unit: float = 1.0,
    ) -> "TrotterConfig":
        if dimension < 2:
            raise ValueError("need at least two modes")
        if trotter_steps < 1:
            raise ValueError("trotter_steps must be a positive integer")
        if section_length <= 0.0:
            raise ValueError("section length must be positive")
        if j1 < 1 or j2 < 1:
            raise ValueError("background windings j1, j2 must be positive integers")
        if epsilon is None:
            epsilon = cls.epsilon_budget(dimension, section_length, trotter_steps, j1)
        recurrence = _cached_recurrence(int(dimension), float(epsilon))
        step = section_length / trotter_steps
        if recurrence.denominator * recurrence_unit <= step:
            factor = math.floor(step / (recurrence.denominator * recurrence_unit)) + 1
            scaled_eps = factor * recurrence.epsilon
            if scaled_eps > epsilon:
                raise PlanError(
                    f"recurrence length {recurrence.denominator * recurrence_unit:g} m is shorter "
                    f"than the Trotter step and scaling q by {factor} breaks the certificate"
                )
            recurrence = DiophantineResult(
                denominator=factor * recurrence.denominator,
                numerators=tuple(factor * p for p in recurrence.numerators),
                residuals=tuple(factor * r for r in recurrence.residuals),
                epsilon=scaled_eps,
                requested=recurrence.requested,
            )
        return cls(
            dimension=int(dimension),
            section_length=float(section_length),
            trotter_steps=int(trotter_steps),
            j1=int(j1),
            j2=int(j2),
            epsilon=float(epsilon),
            recurrence=recurrence,
            recurrence_unit=float(recurrence_unit),
        )

    @property
    def background_coupling(self) -> float:
        return 2.0 * math.pi * self.j1 / self.recurrence_unit

    @property
    def background_beta(self) -> float:
        return 2.0 * math.pi * self.j2 / (self.recurrence.denominator * self.recurrence_unit)

    @property
    def recurrence_length(self) -> float:
        """L~ = q - L/N in meters."""
        return (
            self.recurrence.denominator * self.recurrence_unit
            - self.section_length / self.trotter_steps
        )

    def background_eigenvalues(self) -> np.ndarray:
        return self.background_coupling * toeplitz_eigenvalues(self.dimension) + self.background_beta

    def background_hamiltonian(self) -> TridiagonalHamiltonian:
        d = self.dimension
        return TridiagonalHamiltonian(
            betas=np.full(d, self.background_beta),
            couplings=np.full(d - 1, self.background_coupling),
            length=self.recurrence_length,
        )

    def recurrence_phases(self) -> np.ndarray:
        """Eigenphases of e^{-i B L~}, reduced symbolically.

        lambda~_j L~  ==  2 pi j1 Delta_j - lambda~_j L/N   (mod 2 pi),
        using lambda_j q = p_j + Delta_j and the integer windings; every term
        on the right is small, so no precision is lost to the ~1e10 rad raw
        phases.
        """
        residuals = np.asarray(self.recurrence.residuals)
        return (
            2.0 * math.pi * self.j1 * residuals
            - self.background_eigenvalues() * (self.section_length / self.trotter_steps)
        )

    def recurrence_error(self) -> float:
        """||e^{-i B L~} - e^{+i B L/N}||, equal to max_j |e^{-2 pi i j1 Delta_j} - 1|."""
        residuals = np.asarray(self.recurrence.residuals)
        return float(np.max(np.abs(np.exp(-2j * math.pi * self.j1 * residuals) - 1.0)))


def _block_values(section) -> tuple[float, float, float]:
    """Accept an Su2Section or a symmetric 2x2 array; return (top, bottom, coupling)."""
    if isinstance(section, Su2Section):
        return section.beta_top, section.beta_bottom, section.coupling
    block = np.asarray(section, dtype=float)
    if block.shape != (2, 2) or block[0, 1] != block[1, 0]:
        raise ValueError("expected an Su2Section or a symmetric 2x2 block")
    return float(block[0, 0]), float(block[1, 1]), float(block[0, 1])


@dataclass(frozen=True)
class TrotterPair:
    """One alternating pair: drive section A (length L/N) and recurrence
    section B (length L~), with the exact float block A - B."""

    section_a: TridiagonalHamiltonian
    section_b: TridiagonalHamiltonian
    block: np.ndarray
    mode: int


def plan_trotter_pair(section, mode: int, config: TrotterConfig) -> TrotterPair:
    """Build the (A, B) pair for a 2x2 section embedded at (mode, mode+1).

    A is the uniform background plus the section block at the target modes;
    B is the bare background over the recurrence length. ``block`` records
    A - B as actually representable in floats, so the cancellation
    (A - B == block) holds bitwise on the stored plan.
    """
    d = config.dimension
    if not 1 <= mode <= d - 1:
        raise ValueError(f"mode {mode} out of range for d={d}")
    top, bottom, coupling = _block_values(section)
    if min(top, bottom, coupling) < 0.0:
        raise ValueError("section block values must be non-negative")
    bg_beta = config.background_beta
    bg_coupling = config.background_coupling
    betas = np.full(d, bg_beta)
    betas[mode - 1] = bg_beta + top
    betas[mode] = bg_beta + bottom
    couplings = np.full(d - 1, bg_coupling)
    couplings[mode - 1] = bg_coupling + coupling
    step = config.section_length / config.trotter_steps
    rec_length = config.recurrence_length
    if rec_length <= 0.0:
        raise PlanError(f"recurrence length {rec_length:g} m is not positive")
    section_a = TridiagonalHamiltonian(betas=betas, couplings=couplings, length=step)
    section_b = TridiagonalHamiltonian(
        betas=np.full(d, bg_beta), couplings=np.full(d - 1, bg_coupling), length=rec_length
    )
    block = np.array(
        [
            [betas[mode - 1] - bg_beta, couplings[mode - 1] - bg_coupling],
            [couplings[mode - 1] - bg_coupling, betas[mode] - bg_beta],
        ]
    )
    return TrotterPair(section_a=section_a, section_b=section_b, block=block, mode=mode)


@dataclass(frozen=True)
class GapSpec:
    """Compensated recurrence section: two zero-voltage gaps of ``gap_length``
    bracket an electrode of ``electrode_length`` whose rescaled parameters
    reproduce e^{-i B L~} exactly (everything uniform commutes)."""

    gap_length: float
    electrode_length: float
    zero_beta: float
    zero_coupling: float
    adjusted_beta: float
    adjusted_coupling: float

    def electrode_hamiltonian(self, d: int) -> TridiagonalHamiltonian:
        return TridiagonalHamiltonian(
            betas=np.full(d, self.adjusted_beta),
            couplings=np.full(d - 1, self.adjusted_coupling),
            length=self.electrode_length,
        )

    def gap_hamiltonian(self, d: int) -> TridiagonalHamiltonian:
        return TridiagonalHamiltonian(
            betas=np.full(d, self.zero_beta),
            couplings=np.full(d - 1, self.zero_coupling),
            length=self.gap_length,
        )


def gap_compensate(
    section_b: TridiagonalHamiltonian, gap_length: float, zero_voltage: tuple[float, float]
) -> GapSpec:
    """Rescale a uniform recurrence section to absorb its two electrode gaps.

    beta' = (beta0~ L~ - 2 beta0 dL)/L' and likewise for the coupling, with
    L' = L~ - 2 dL. Raises GapInfeasible when a rescaled parameter is not
    strictly positive.
    """
    if not section_b.is_uniform():
        raise ValueError("gap compensation requires a uniform (Toeplitz) section")
    zero_beta, zero_coupling = (float(x) for x in zero_voltage)
    if zero_beta <= 0.0 or zero_coupling <= 0.0:
        raise ValueError("zero-voltage constants must be strictly positive")
    if gap_length < 0.0:
        raise ValueError("gap length must be non-negative")
    electrode = section_b.length - 2.0 * gap_length
    if electrode <= 0.0:
        raise ValueError(
            f"electrode length {electrode:g} m not positive: gap too long for the section"
        )
    adjusted_beta = (section_b.betas[0] * section_b.length - 2.0 * zero_beta * gap_length) / electrode
    adjusted_coupling = (
        section_b.couplings[0] * section_b.length - 2.0 * zero_coupling * gap_length
    ) / electrode
    if adjusted_beta <= 0.0 or adjusted_coupling <= 0.0:
        raise GapInfeasible(
            f"compensation gives beta'={adjusted_beta:g}, C'={adjusted_coupling:g}; "
            "increase the background windings j1/j2 or shrink the gap"
        )
    return GapSpec(
        gap_length=float(gap_length),
        electrode_length=float(electrode),
        zero_beta=zero_beta,
        zero_coupling=zero_coupling,
        adjusted_beta=float(adjusted_beta),
        adjusted_coupling=float(adjusted_coupling),
    )


@dataclass(frozen=True)
class PlanSection:
    """One physical section of a chip plan.

    ``reduced_phases``, when present, are the eigenphases of the section
    unitary in the shared sine basis, already reduced mod 2 pi symbolically;
    recurrence sections are kilometers to gigameters long and their raw
    eigenvalue-length products cannot be trusted in double precision.
    """

    kind: str
    hamiltonian: TridiagonalHamiltonian
    factor_index: int | None = None
    su2_index: int | None = None
    trotter_step: int | None = None
    reduced_phases: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in (SECTION_A, SECTION_B, SECTION_GAP):
            raise ValueError(f"bad section kind {self.kind!r}")
        if self.reduced_phases is not None and not self.hamiltonian.is_uniform():
            raise ValueError("reduced phases only apply to uniform sections")

    def unitary(self) -> np.ndarray:
        if self.reduced_phases is None:
            return self.hamiltonian.unitary()
        basis = toeplitz_eigenvectors(self.hamiltonian.dimension)
        return (basis * np.exp(-1j * np.asarray(self.reduced_phases))) @ basis.T


@dataclass
class ChipPlan:
    """Ordered physical sections realizing a target unitary, plus metadata.

    ``section_budget`` is the architectural count K: 4 K~ N alternating pairs
    for d > 2, the at-most-four exact sections for d = 2. The actual emitted
    count is len(sections) and never exceeds the budget's A-section share.
    """

    dimension: int
    trotter_steps: int
    section_budget: int
    section_length: float
    sections: list[PlanSection]
    measured_error: float | None = None
    epsilon_certificate: float | None = None
    global_phase: float = 0.0
    config: TrotterConfig | None = None
    target_name: str | None = None

    def realize(self) -> np.ndarray:
        """Cascade product, first section applied first."""
        u = np.eye(self.dimension, dtype=complex)
        cache: dict = {}
        for section in self.sections:
            key = (
                section.hamiltonian.betas.tobytes(),
                section.hamiltonian.couplings.tobytes(),
                section.hamiltonian.length,
                section.reduced_phases,
            )
            mat = cache.get(key)
            if mat is None:
                mat = section.unitary()
                cache[key] = mat
            u = mat @ u
        return u

    def section_hamiltonians(self) -> list[TridiagonalHamiltonian]:
        return [s.hamiltonian for s in self.sections]

    def kind_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.sections:
            counts[s.kind] = counts.get(s.kind, 0) + 1
        return counts

    def to_json(self) -> str:
        payload = {
            "schema_version": PLAN_SCHEMA_VERSION,
            "metadata": {
                "d": self.dimension,
                "N": self.trotter_steps,
                "K": self.section_budget,
                "measured_error": self.measured_error,
                "epsilon_certificate": self.epsilon_certificate,
                "section_length_m": self.section_length,
                "global_phase": self.global_phase,
                "target_name": self.target_name,
                "config": None
                if self.config is None
                else {
                    "j1": self.config.j1,
                    "j2": self.config.j2,
                    "epsilon": self.config.epsilon,
                    "recurrence_unit": self.config.recurrence_unit,
                    "q": self.config.recurrence.denominator,
                    "numerators": list(self.config.recurrence.numerators),
                    "residuals": list(self.config.recurrence.residuals),
                    "achieved_epsilon": self.config.recurrence.epsilon,
                },
            },
            "sections": [
                {
                    "kind": s.kind,
                    "betas": [float(x) for x in s.hamiltonian.betas],
                    "couplings": [float(x) for x in s.hamiltonian.couplings],
                    "length_m": s.hamiltonian.length,
                    "provenance": {
                        "factor_index": s.factor_index,
                        "su2_index": s.su2_index,
                        "trotter_step": s.trotter_step,
                    },
                    "reduced_phases": None
                    if s.reduced_phases is None
                    else list(s.reduced_phases),
                }
                for s in self.sections
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChipPlan":
        payload = json.loads(text)
        if payload.get("schema_version") != PLAN_SCHEMA_VERSION:
            raise ValueError(f"unsupported plan schema {payload.get('schema_version')!r}")
        meta = payload["metadata"]
        config = None
        raw_cfg = meta.get("config")
        if raw_cfg is not None:
            recurrence = DiophantineResult(
                denominator=int(raw_cfg["q"]),
                numerators=tuple(int(p) for p in raw_cfg["numerators"]),
                residuals=tuple(float(r) for r in raw_cfg["residuals"]),
                epsilon=float(raw_cfg["achieved_epsilon"]),
                requested=float(raw_cfg["epsilon"]),
            )
            config = TrotterConfig(
                dimension=int(meta["d"]),
                section_length=float(meta["section_length_m"]),
                trotter_steps=int(meta["N"]),
                j1=int(raw_cfg["j1"]),
                j2=int(raw_cfg["j2"]),
                epsilon=float(raw_cfg["epsilon"]),
                recurrence=recurrence,
                recurrence_unit=float(raw_cfg["recurrence_unit"]),
            )
        sections = [
            PlanSection(
                kind=item["kind"],
                hamiltonian=TridiagonalHamiltonian(
                    betas=np.array(item["betas"]),
                    couplings=np.array(item["couplings"]),
                    length=float(item["length_m"]),
                ),
                factor_index=item["provenance"].get("factor_index"),
                su2_index=item["provenance"].get("su2_index"),
                trotter_step=item["provenance"].get("trotter_step"),
                reduced_phases=None
                if item.get("reduced_phases") is None
                else tuple(float(x) for x in item["reduced_phases"]),
            )
            for item in payload["sections"]
        ]
        return cls(
            dimension=int(meta["d"]),
            trotter_steps=int(meta["N"]),
            section_budget=int(meta["K"]),
            section_length=float(meta["section_length_m"]),
            sections=sections,
            measured_error=meta.get("measured_error"),
            epsilon_certificate=meta.get("epsilon_certificate"),
            global_phase=float(meta.get("global_phase", 0.0)),
            config=config,
            target_name=meta.get("target_name"),
        )


def _gap_windings_for_feasibility(
    config: TrotterConfig, gap_length: float, zero_voltage: tuple[float, float]
) -> tuple[int, int]:
    """Smallest (j1, j2) keeping both compensated parameters positive."""
    zero_beta, zero_coupling = zero_voltage
    rec_length = config.recurrence_length
    q_length = config.recurrence.denominator * config.recurrence_unit
    # background_beta * rec_length = 2 pi j2 * rec_length / q_length must exceed 2 beta0 dL
    j2 = max(
        config.j2,
        math.floor(zero_beta * gap_length * q_length / (math.pi * rec_length)) + 1,
    )
    # background_coupling * rec_length = (2 pi j1 / unit) rec_length must exceed 2 C0 dL
    j1 = max(
        config.j1,
        math.floor(zero_coupling * gap_length * config.recurrence_unit / (math.pi * rec_length))
        + 1,
    )
    return j1, j2


def compile_unitary(
    target,
    section_length: float = 6e-3,
    trotter_steps: int = 8,
    j1: int = 1,
    j2: int = 1,
    epsilon: float | None = None,
    config: TrotterConfig | None = None,
    bounds: ParameterBounds | None = None,
    gap_length: float = 0.0,
    zero_voltage: tuple[float, float] | None = None,
    prune_identity: bool = False,
    measure: bool = True,
    target_name: str | None = None,
) -> ChipPlan:
    """Full pipeline: decompose, synthesize, Trotterize, optionally compensate gaps.

    For d = 2 the four-section synthesis is already physical and the plan is
    exact. For d > 2 each synthesized section becomes N (B, A) pairs in
    physical order B-first, matching the product (e^{-iA L/N} e^{-iB L~})^N.
    """
    u = require_unitary(target, atol=1e-8, what="target")
    d = u.shape[0]
    bounds = bounds or ParameterBounds()
    factors = two_level_decompose(u)
    ops = adjacent_expand(factors, d, prune_identity=prune_identity)
    global_phase = float(np.angle(np.linalg.det(u)))
    sections: list[PlanSection] = []

    if d == 2 and gap_length > 0.0:
        raise ValueError(
            "gap compensation applies to recurrence sections; exact d=2 plans have none"
        )
    if d == 2:
        for op_index, op in enumerate(ops):
            for su2_index, sec in enumerate(synthesize_su2(op.matrix, section_length, bounds)):
                ham = TridiagonalHamiltonian(
                    betas=np.array([sec.beta_top, sec.beta_bottom]),
                    couplings=np.array([sec.coupling]),
                    length=section_length,
                )
                sections.append(
                    PlanSection(
                        kind=SECTION_A,
                        hamiltonian=ham,
                        factor_index=op_index,
                        su2_index=su2_index,
                    )
                )
        plan = ChipPlan(
            dimension=d,
            trotter_steps=1,
            section_budget=4,
            section_length=section_length,
            sections=sections,
            global_phase=global_phase,
            target_name=target_name,
        )
        if measure:
            plan.measured_error = operator_norm(u - plan.realize())
        return plan

    if config is None:
        config = TrotterConfig.plan(d, section_length, trotter_steps, j1, j2, epsilon)
    if config.dimension != d:
        raise ValueError(f"config is for d={config.dimension}, target has d={d}")
    if gap_length > 0.0:
        if zero_voltage is None:
            raise ValueError("gap compensation needs the zero-voltage (beta0, C0) constants")
        need_j1, need_j2 = _gap_windings_for_feasibility(config, gap_length, zero_voltage)
        if need_j1 != config.j1 or need_j2 != config.j2:
            config = TrotterConfig.plan(
                d,
                config.section_length,
                config.trotter_steps,
                need_j1,
                need_j2,
                recurrence_unit=config.recurrence_unit,
            )

    rec_phases = config.recurrence_phases()
    if gap_length > 0.0:
        spec = gap_compensate(config.background_hamiltonian(), gap_length, zero_voltage)
        zero_beta, zero_coupling = (float(x) for x in zero_voltage)
        gap_phases = (zero_beta + zero_coupling * toeplitz_eigenvalues(d)) * gap_length
        electrode_phases = rec_phases - 2.0 * gap_phases
        gap_section = PlanSection(
            kind=SECTION_GAP,
            hamiltonian=spec.gap_hamiltonian(d),
            reduced_phases=tuple(float(x) for x in gap_phases),
        )
        electrode_section = PlanSection(
            kind=SECTION_B,
            hamiltonian=spec.electrode_hamiltonian(d),
            reduced_phases=tuple(float(x) for x in electrode_phases),
        )
        b_template = [gap_section, electrode_section, gap_section]
    else:
        b_template = [
            PlanSection(
                kind=SECTION_B,
                hamiltonian=config.background_hamiltonian(),
                reduced_phases=tuple(float(x) for x in rec_phases),
            )
        ]

    for op_index, op in enumerate(ops):
        for su2_index, sec in enumerate(synthesize_su2(op.matrix, section_length, bounds)):
            pair = plan_trotter_pair(sec, op.mode, config)
            a_section = PlanSection(
                kind=SECTION_A,
                hamiltonian=pair.section_a,
                factor_index=op_index,
                su2_index=su2_index,
            )
            for step in range(config.trotter_steps):
                for part in b_template:
                    sections.append(
                        replace(
                            part,
                            factor_index=op_index,
                            su2_index=su2_index,
                            trotter_step=step,
                        )
                    )
                sections.append(replace(a_section, trotter_step=step))

    plan = ChipPlan(
        dimension=d,
        trotter_steps=config.trotter_steps,
        section_budget=4 * count_sections(d) * config.trotter_steps,
        section_length=section_length,
        sections=sections,
        epsilon_certificate=config.recurrence.epsilon,
        global_phase=global_phase,
        config=config,
        target_name=target_name,
    )
    if measure:
        plan.measured_error = operator_norm(u - plan.realize())
    return plan
