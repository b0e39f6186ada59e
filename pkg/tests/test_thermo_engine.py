#!/usr/bin/env python3
"""
Tests for Gibbs states, energy matching and the work ledger
"""

import math

import numpy as np
import pytest

from entropy_info import von_neumann_entropy
from errors import DimensionError, EnergyRangeError, LedgerError, ParameterError, TruncationError
from operator_core import (DensityOperator, HermitianOperator, Partition, basis_projector,
                           density_from_pure, embed, evolve, expectation, number_operator, partial_trace,
                           product_state, sigma_z)
from thermo_engine import (WorkLedger, certify_truncation, delta_d, divergence_from_thermal,
                           entropy_gap_chain, free_energy, gibbs_energy, gibbs_identity_residual,
                           gibbs_state, heat, match_beta, relative_entropy_to_thermal, work_ledger)
from utils.random_states import make_rng, random_density_matrix, random_hermitian, random_unitary


class TestGibbsState:
    """Thermal states and partition functions"""

    def test_qubit_populations(self):
        """Test populations of a qubit Gibbs state"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0]))
        thermal = gibbs_state(h, 2.0)
        expected = np.array([1.0, math.exp(-2.0)]) / (1 + math.exp(-2.0))
        assert np.allclose(np.diag(thermal.state.matrix).real, expected)
        assert thermal.partition_function == pytest.approx(1 + math.exp(-2.0))
        assert not thermal.negative_temperature

    def test_beta_zero_is_maximally_mixed(self):
        """Test beta = 0 gives the maximally mixed state"""
        h = HermitianOperator.from_matrix(random_hermitian(4, make_rng(20)))
        thermal = gibbs_state(h, 0.0)
        assert np.allclose(thermal.state.matrix, np.eye(4) / 4, atol=1e-12)

    def test_large_beta_no_overflow(self):
        """Test very large beta still yields a normalized ground state"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0, 2.0]))
        thermal = gibbs_state(h, 1e4)
        assert thermal.state.matrix[0, 0].real == pytest.approx(1.0)
        assert math.isfinite(thermal.log_partition_function)

    def test_negative_beta_flagged(self):
        """Test negative beta is accepted and flagged"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0]))
        assert gibbs_state(h, -1.0).negative_temperature

    def test_infinite_beta_rejected(self):
        """Test non-finite beta raises"""
        with pytest.raises(ParameterError):
            gibbs_state(HermitianOperator.from_matrix(np.eye(2)), math.inf)


class TestMatchBeta:
    """Energy-matched inverse temperature"""

    def setup_method(self):
        """Setup a truncated oscillator"""
        self.omega = 0.5
        self.h = HermitianOperator.from_matrix(self.omega * number_operator(200))

    def test_oscillator_closed_form(self):
        """Test E = 1, omega = 0.5 gives beta = 2 ln 1.5"""
        beta = match_beta(self.h, 1.0)
        assert beta == pytest.approx(2 * math.log(1.5), abs=1e-9)
        assert beta == pytest.approx(0.810930, abs=1e-6)

    def test_round_trip(self):
        """Test gibbs_energy(match_beta(E)) = E on random Hamiltonians"""
        rng = make_rng(21)
        for _ in range(30):
            h = HermitianOperator.from_matrix(random_hermitian(int(rng.integers(2, 7)), rng))
            values = np.linalg.eigvalsh(h.matrix)
            energy = values[0] + rng.uniform(0.05, 0.95) * (values[-1] - values[0])
            beta = match_beta(h, energy)
            assert gibbs_energy(h, beta) == pytest.approx(energy, abs=1e-9)

    def test_mean_energy_gives_zero(self):
        """Test the spectral mean maps to beta = 0"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0, 2.0]))
        assert match_beta(h, 1.0) == 0.0

    def test_above_mean_negative(self):
        """Test energies above the mean give negative beta"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0]))
        assert match_beta(h, 0.8) < 0

    def test_outside_range(self):
        """Test boundary and out-of-range energies raise"""
        h = HermitianOperator.from_matrix(np.diag([0.0, 1.0]))
        for energy in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(EnergyRangeError):
                match_beta(h, energy)


class TestTruncationCertificate:
    """Top-level population checks"""

    def test_certified(self):
        """Test a cold oscillator passes certification"""
        thermal = gibbs_state(HermitianOperator.from_matrix(number_operator(60)), 1.0)
        assert certify_truncation(thermal) < 1e-12

    def test_too_small(self):
        """Test a hot, short ladder fails with the offending level"""
        thermal = gibbs_state(HermitianOperator.from_matrix(number_operator(10)), 0.1)
        with pytest.raises(TruncationError) as exc:
            certify_truncation(thermal)
        assert exc.value.level == 9
        assert exc.value.population > 1e-12


class TestHeatAndFreeEnergy:
    """Heat, free energy and relative-entropy identities"""

    def setup_method(self):
        """Setup a random bath Hamiltonian and state"""
        self.rng = make_rng(22)
        self.h = HermitianOperator.from_matrix(random_hermitian(5, self.rng))
        self.rho = DensityOperator.from_matrix(random_density_matrix(5, self.rng))
        energy = expectation(self.h, self.rho)
        self.thermal = gibbs_state(self.h, match_beta(self.h, energy))

    def test_heat_is_energy_change(self):
        """Test heat is the bath energy difference"""
        other = DensityOperator.from_matrix(random_density_matrix(5, self.rng))
        assert heat(self.h, self.rho, other) == pytest.approx(
            expectation(self.h, other) - expectation(self.h, self.rho))

    def test_free_energy_requires_nonzero_beta(self):
        """Test F is undefined at beta = 0"""
        with pytest.raises(ParameterError):
            free_energy(self.rho, self.h, 0.0)

    def test_free_energy_minimized_by_gibbs(self):
        """Test the Gibbs state has the lowest free energy at positive beta"""
        for seed in range(40, 50):
            rng = make_rng(seed)
            h = HermitianOperator.from_matrix(random_hermitian(4, rng))
            beta = float(rng.uniform(0.1, 5.0))
            thermal = gibbs_state(h, beta)
            rho = DensityOperator.from_matrix(random_density_matrix(4, rng))
            assert free_energy(thermal.state, h, beta) <= free_energy(rho, h, beta) + 1e-12

    def test_closed_form_divergence(self):
        """Test D(sigma||rho_th) two ways"""
        full = divergence_from_thermal(self.rho, self.thermal)
        closed = relative_entropy_to_thermal(self.rho, self.thermal)
        assert full == pytest.approx(closed, abs=1e-10)

    def test_gibbs_identity(self):
        """Test S(rho_th) - S(rho) = D(rho||rho_th) at matched energy"""
        assert gibbs_identity_residual(self.rho, self.thermal) == pytest.approx(0.0, abs=1e-9)
        assert von_neumann_entropy(self.thermal.state) >= von_neumann_entropy(self.rho)

    def test_entropy_gap_chain(self):
        """Test S(rho') - S(rho_th) = beta dQ - D(rho'||rho_th) for a bath starting thermal"""
        final = evolve(self.thermal.state, random_unitary(5, self.rng))
        lhs, rhs = entropy_gap_chain(final, self.thermal.state, self.thermal)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_delta_d_zero_for_same_state(self):
        """Test Delta D vanishes when the bath does not change"""
        assert delta_d(self.rho, self.rho, self.thermal) == pytest.approx(0.0, abs=1e-14)


class TestWorkLedger:
    """First-law bookkeeping"""

    def test_inconsistent_terms(self):
        """Test a ledger whose parts do not add up is rejected"""
        with pytest.raises(LedgerError):
            WorkLedger(total_work=1.0, system_term=0.2, heat=0.2, interaction_term=0.2)

    def test_addition(self):
        """Test ledgers add termwise"""
        total = WorkLedger(1.0, 0.5, 0.25, 0.25) + WorkLedger(0.5, 0.5, 0.0, 0.0)
        assert total.total_work == 1.5
        assert total.system_term == 1.0

    def test_decomposition_random(self):
        """Test W splits into system, heat and interaction terms"""
        rng = make_rng(23)
        p = Partition((2, 3))
        h_s = HermitianOperator.from_matrix(random_hermitian(2, rng))
        h_s_prime = HermitianOperator.from_matrix(random_hermitian(2, rng))
        h_b = HermitianOperator.from_matrix(random_hermitian(3, rng))
        h_int = HermitianOperator.from_matrix(random_hermitian(6, rng))
        h_int_prime = HermitianOperator.from_matrix(random_hermitian(6, rng))
        rho = DensityOperator.from_matrix(random_density_matrix(6, rng))
        rho_prime = evolve(rho, random_unitary(6, rng))

        ledger = work_ledger(h_s, h_s_prime, h_b, h_int, h_int_prime, rho, rho_prime, p)
        total_after = embed(h_s_prime.matrix, p, 0) + embed(h_b.matrix, p, 1) + h_int_prime.matrix
        total_before = embed(h_s.matrix, p, 0) + embed(h_b.matrix, p, 1) + h_int.matrix
        expected = expectation(total_after, rho_prime) - expectation(total_before, rho)
        assert ledger.total_work == pytest.approx(expected, abs=1e-12)
        assert ledger.total_work == pytest.approx(
            ledger.system_term + ledger.heat + ledger.interaction_term, abs=1e-10)

    def test_no_driving_no_work(self):
        """Test an uncoupled, undriven product state does no work"""
        p = Partition((2, 2))
        h = HermitianOperator.from_matrix(sigma_z())
        zero = HermitianOperator.zeros(4)
        rho = product_state(basis_projector(2, 0), density_from_pure([1, 1]))
        ledger = work_ledger(h, h, h, zero, zero, rho, rho, p)
        assert ledger.total_work == pytest.approx(0.0, abs=1e-15)

    def test_supplied_marginals_match(self):
        """Test passing precomputed marginals gives the same ledger"""
        rng = make_rng(24)
        p = Partition((2, 3))
        h_s = HermitianOperator.from_matrix(random_hermitian(2, rng))
        h_b = HermitianOperator.from_matrix(random_hermitian(3, rng))
        h_int = HermitianOperator.from_matrix(random_hermitian(6, rng))
        rho = DensityOperator.from_matrix(random_density_matrix(6, rng))
        rho_prime = evolve(rho, random_unitary(6, rng))
        marginals = (partial_trace(rho, p, {0}), partial_trace(rho, p, {1}),
                     partial_trace(rho_prime, p, {0}), partial_trace(rho_prime, p, {1}))

        plain = work_ledger(h_s, h_s, h_b, h_int, h_int, rho, rho_prime, p)
        cached = work_ledger(h_s, h_s, h_b, h_int, h_int, rho, rho_prime, p, marginals=marginals)
        assert cached.heat == pytest.approx(plain.heat, abs=1e-14)
        assert cached.system_term == pytest.approx(plain.system_term, abs=1e-14)
        assert cached.total_work == pytest.approx(plain.total_work, abs=1e-14)

    def test_marginal_dimension_checked(self):
        """Test marginals of the wrong size are rejected"""
        p = Partition((2, 2))
        h = HermitianOperator.from_matrix(sigma_z())
        zero = HermitianOperator.zeros(4)
        rho = product_state(basis_projector(2, 0), basis_projector(2, 1))
        wrong = basis_projector(3, 0)
        with pytest.raises(DimensionError):
            work_ledger(h, h, h, zero, zero, rho, rho, p, marginals=(wrong, wrong, wrong, wrong))
