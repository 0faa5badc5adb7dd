"""pwa-synth: compile, simulate and optimize cascaded programmable waveguide arrays."""

from .device import (
    DeviceModel,
    PropagationTrace,
    VoltageSettings,
    dyson_first_order,
    hamiltonian_from_voltages,
    propagate,
    realize,
)
from .gates import GateKind, NamedGate, clock, dft, hadamard, identity, named_gate, pauli_x, shift
from .lattice import (
    DiophantineResult,
    PrecisionUnreachable,
    lll_reduce,
    simultaneous_diophantine,
)
from .linalg import (
    FidelityReport,
    TridiagonalHamiltonian,
    expm_hermitian,
    fidelity,
    haar_random_unitary,
    operator_norm,
    toeplitz_eigenvalues,
    unitarity_defect,
)
from .optimizer import (
    OptimizationResult,
    OptimizationTask,
    infidelity_and_gradient,
    optimize,
)
from .planner import (
    ChipPlan,
    GapInfeasible,
    GapSpec,
    PlanError,
    PlanSection,
    TrotterConfig,
    TrotterPair,
    compile_unitary,
    gap_compensate,
    plan_trotter_pair,
)
from .reck import (
    AdjacentOp,
    TwoLevelFactor,
    adjacent_expand,
    count_sections,
    reconstruct_adjacent,
    reconstruct_factors,
    two_level_decompose,
)
from .su2 import (
    BoundsInfeasible,
    ParameterBounds,
    PhaseGateRequired,
    Su2GateParams,
    Su2Section,
    parse_su2,
    rotation_section,
    sections_unitary,
    synthesize_su2,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacentOp",
    "BoundsInfeasible",
    "ChipPlan",
    "DeviceModel",
    "DiophantineResult",
    "FidelityReport",
    "GapInfeasible",
    "GapSpec",
    "GateKind",
    "NamedGate",
    "OptimizationResult",
    "OptimizationTask",
    "ParameterBounds",
    "PhaseGateRequired",
    "PlanError",
    "PlanSection",
    "PrecisionUnreachable",
    "PropagationTrace",
    "Su2GateParams",
    "Su2Section",
    "TridiagonalHamiltonian",
    "TrotterConfig",
    "TrotterPair",
    "TwoLevelFactor",
    "VoltageSettings",
    "adjacent_expand",
    "clock",
    "compile_unitary",
    "count_sections",
    "dft",
    "dyson_first_order",
    "expm_hermitian",
    "fidelity",
    "gap_compensate",
    "haar_random_unitary",
    "hadamard",
    "hamiltonian_from_voltages",
    "identity",
    "infidelity_and_gradient",
    "lll_reduce",
    "named_gate",
    "operator_norm",
    "optimize",
    "parse_su2",
    "pauli_x",
    "plan_trotter_pair",
    "propagate",
    "realize",
    "reconstruct_adjacent",
    "reconstruct_factors",
    "rotation_section",
    "sections_unitary",
    "shift",
    "simultaneous_diophantine",
    "synthesize_su2",
    "toeplitz_eigenvalues",
    "two_level_decompose",
    "unitarity_defect",
]
