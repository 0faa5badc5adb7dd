import numpy as np
import pytest

from pwa_synth import (
    BoundsInfeasible,
    ParameterBounds,
    PhaseGateRequired,
    haar_random_unitary,
    operator_norm,
    parse_su2,
    rotation_section,
    sections_unitary,
    synthesize_su2,
)
from pwa_synth.su2 import (
    COUPLER_ROLE,
    HADAMARD_ROLE,
    ROTATION_ROLE,
    Su2GateParams,
    Su2Section,
    hadamard_section,
)

L = 6e-3


class TestParseSu2:
    def test_identity(self):
        p = parse_su2(np.eye(2))
        assert p.amplitude == pytest.approx(1.0)
        assert p.top_phase == 0.0
        assert p.off_phase == 0.0
        assert p.global_phase == pytest.approx(0.0)

    def test_pauli_x(self, pauli_x):
        p = parse_su2(pauli_x)
        assert p.amplitude == pytest.approx(0.0, abs=1e-12)
        assert p.global_phase == pytest.approx(np.pi / 2.0)
        assert p.off_phase == pytest.approx(-np.pi / 2.0)
        assert operator_norm(p.reconstruct() - pauli_x) <= 1e-12

    def test_hadamard(self, hadamard_matrix):
        p = parse_su2(hadamard_matrix)
        assert p.amplitude == pytest.approx(1.0 / np.sqrt(2.0))
        assert operator_norm(p.reconstruct() - hadamard_matrix) <= 1e-12

    @pytest.mark.parametrize("seed", range(25))
    def test_round_trip(self, seed):
        u = haar_random_unitary(2, seed)
        p = parse_su2(u)
        assert operator_norm(p.reconstruct() - u) <= 1e-12
        assert -np.pi / 2.0 < p.global_phase <= np.pi / 2.0
        assert p.amplitude == pytest.approx(abs(u[0, 0]), abs=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="not unitary"):
            parse_su2(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestRotationSection:
    def test_hadamard_parameters(self, hadamard_matrix):
        p = parse_su2(hadamard_matrix)
        sec = rotation_section(p, L)
        expected = np.pi / (2.0 * np.sqrt(2.0) * L)
        assert sec.coupling == pytest.approx(expected, rel=1e-12)
        assert sec.detune == pytest.approx(expected, rel=1e-12)
        # mean level realizes the pi/2 global phase: beta*L = -pi/2 mod 2pi
        phase = (sec.beta_mean * L) % (2.0 * np.pi)
        assert phase == pytest.approx(2.0 * np.pi - np.pi / 2.0, abs=1e-9)
        assert operator_norm(sec.unitary() - hadamard_matrix) <= 1e-10

    def test_amplitude_zero(self):
        # r = 0: quarter rotation, no detuning
        p = Su2GateParams(amplitude=0.0, top_phase=0.0, off_phase=-np.pi / 2, global_phase=0.3)
        sec = rotation_section(p, L)
        assert p.rotation_angle == pytest.approx(np.pi / 2.0)
        assert sec.coupling == pytest.approx(np.pi / (2.0 * L), rel=1e-12)
        assert sec.detune == pytest.approx(0.0, abs=1e-12)

    def test_matches_rotation_block(self):
        # e^{i eta} R(r, zeta, pi/2) for (r, zeta, eta) = (0.6, 0.3, 1.1)
        r, zeta, eta = 0.6, 0.3, 1.1
        xi = 0.0
        p = Su2GateParams(
            amplitude=r, top_phase=-(zeta + xi), off_phase=xi - np.pi / 2.0, global_phase=eta
        )
        assert p.rotation_phase == pytest.approx(zeta)
        sec = rotation_section(p, L)
        s = np.sqrt(1.0 - r * r)
        target = np.exp(1j * eta) * np.array(
            [[r * np.exp(-1j * zeta), -1j * s], [-1j * s, r * np.exp(1j * zeta)]]
        )
        assert operator_norm(sec.unitary() - target) <= 1e-10
        assert sec.coupling > 0.0

    def test_phase_gate_raises(self):
        p = Su2GateParams(amplitude=1.0, top_phase=0.4, off_phase=0.0, global_phase=0.0)
        with pytest.raises(PhaseGateRequired):
            rotation_section(p, L)


class TestSynthesizeSu2:
    def test_phase_gate_three_sections(self):
        xi = 0.4
        u = np.diag([np.exp(-1j * xi), np.exp(1j * xi)])
        sections = synthesize_su2(u, L)
        assert [s.role for s in sections] == [HADAMARD_ROLE, COUPLER_ROLE, HADAMARD_ROLE]
        middle = sections[1]
        assert middle.coupling == pytest.approx(xi / L, rel=1e-12)
        assert middle.detune == 0.0
        assert operator_norm(sections_unitary(sections) - u) <= 1e-10

    def test_identity_two_hadamards(self):
        sections = synthesize_su2(np.eye(2), L)
        assert [s.role for s in sections] == [HADAMARD_ROLE, HADAMARD_ROLE]
        assert operator_norm(sections_unitary(sections) - np.eye(2)) <= 1e-10

    def test_haar_four_sections(self):
        u = haar_random_unitary(2, 3)
        sections = synthesize_su2(u, L)
        assert len(sections) == 4
        assert sections[3].role == ROTATION_ROLE
        assert operator_norm(sections_unitary(sections) - u) <= 1e-10

    def test_hadamard_sections_match_table_columns(self):
        # sections 1 and 3 of any synthesis are the same Hadamard section
        u = haar_random_unitary(2, 8)
        sections = synthesize_su2(u, L)
        assert sections[0] == sections[2]
        expected = np.pi / (2.0 * np.sqrt(2.0) * L)
        assert sections[0].coupling == pytest.approx(expected, rel=1e-12)
        assert sections[0].detune == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("seed", range(30))
    def test_positivity_always_holds(self, seed):
        sections = synthesize_su2(haar_random_unitary(2, seed), L)
        for s in sections:
            assert s.coupling > 0.0
            assert s.beta_top > 0.0
            assert s.beta_bottom > 0.0

    @pytest.mark.parametrize(
        "u_builder",
        [
            lambda: np.eye(2, dtype=complex),
            lambda: -np.eye(2, dtype=complex),
            lambda: np.exp(0.3j) * np.eye(2, dtype=complex),
            lambda: np.array([[0, 1], [1, 0]], dtype=complex),
            lambda: np.diag([np.exp(0.9j), np.exp(-0.9j)]),
        ],
    )
    def test_special_gates_exact(self, u_builder):
        u = u_builder()
        sections = synthesize_su2(u, L)
        assert len(sections) <= 4
        assert operator_norm(sections_unitary(sections) - u) <= 1e-10

    def test_bounds_respected_and_infeasible(self):
        bounds = ParameterBounds(beta_min=100.0, beta_max=5000.0, kappa_min=0.0, kappa_max=1e4)
        sections = synthesize_su2(haar_random_unitary(2, 5), L, bounds)
        for s in sections:
            assert 100.0 < s.beta_bottom and s.beta_top <= 5000.0
        tight = ParameterBounds(beta_min=0.0, beta_max=10.0)
        with pytest.raises(BoundsInfeasible):
            synthesize_su2(haar_random_unitary(2, 5), L, tight)

    def test_kappa_bounds_infeasible_for_fixed_hadamard_coupling(self):
        bounds = ParameterBounds(kappa_min=0.0, kappa_max=1.0)
        with pytest.raises(BoundsInfeasible) as err:
            hadamard_section(L, bounds)
        assert err.value.role == HADAMARD_ROLE

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError, match="length"):
            synthesize_su2(np.eye(2), 0.0)


def test_section_validation():
    with pytest.raises(ValueError, match="coupling"):
        Su2Section(
            beta_mean=1.0, detune=0.0, coupling=0.0, length=L,
            phase_winding=0, coupling_winding=None, role=COUPLER_ROLE,
        )
    with pytest.raises(ValueError, match="positive"):
        Su2Section(
            beta_mean=1.0, detune=2.0, coupling=1.0, length=L,
            phase_winding=0, coupling_winding=None, role=ROTATION_ROLE,
        )
