#!/usr/bin/env python3
"""
Tests for entropy and information functionals
"""

import math

import numpy as np
import pytest

from entropy_info import (binary_entropy, correlation_information, entropy_value, joint_entropy,
                          marginal_entropy, mutual_information, reduced_states, relative_entropy,
                          thermo_entropy, von_neumann_entropy)
from errors import DimensionError, ParameterError
from operator_core import (DensityOperator, Partition, basis_projector, density_from_pure, evolve,
                           maximally_mixed, product_state)
from utils.random_states import (make_rng, random_density_matrix, random_tripartite_dims,
                                 random_unitary)


class TestVonNeumannEntropy:
    """Entropy of single states"""

    def test_pure_state_zero(self):
        """Test pure states have zero entropy"""
        assert von_neumann_entropy(basis_projector(3, 1)) == 0.0

    def test_maximally_mixed(self):
        """Test maximally mixed states reach ln d"""
        for d in (2, 3, 7):
            assert von_neumann_entropy(maximally_mixed(d)) == pytest.approx(math.log(d), abs=1e-14)

    def test_bounds_random(self):
        """Test 0 <= S <= ln d over random states"""
        rng = make_rng(10)
        for _ in range(50):
            d = int(rng.integers(2, 9))
            s = von_neumann_entropy(DensityOperator.from_matrix(random_density_matrix(d, rng)))
            assert 0.0 <= s <= math.log(d)

    def test_thermo_entropy_scaling(self):
        """Test the thermodynamic entropy is k times the information entropy"""
        rho = maximally_mixed(2)
        assert thermo_entropy(rho, k=2.5) == pytest.approx(2.5 * math.log(2))
        value = entropy_value(rho, k=2.0)
        assert value.nats == pytest.approx(math.log(2))
        assert value.boltzmann_scaled == pytest.approx(2 * math.log(2))

    def test_non_positive_k(self):
        """Test k <= 0 is rejected"""
        with pytest.raises(ParameterError):
            thermo_entropy(maximally_mixed(2), k=0.0)

    def test_binary_entropy(self):
        """Test h(p) at the endpoints, the midpoint and p = 1/4"""
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(math.log(2))
        assert 2 * binary_entropy(0.25) == pytest.approx(2 * math.log(4) - 1.5 * math.log(3), abs=1e-12)
        with pytest.raises(ParameterError):
            binary_entropy(1.5)


class TestCorrelationInformation:
    """Marginal, joint and correlation information"""

    def test_product_state_zero(self):
        """Test product states carry no correlation"""
        rng = make_rng(11)
        a = DensityOperator.from_matrix(random_density_matrix(2, rng))
        b = DensityOperator.from_matrix(random_density_matrix(3, rng))
        rho = product_state(a, b)
        assert correlation_information(rho, Partition((2, 3))) == pytest.approx(0.0, abs=1e-12)

    def test_bell_state(self):
        """Test a Bell state has I = 2 ln 2 and zero joint entropy"""
        rho = density_from_pure(np.array([1, 0, 0, 1]) / math.sqrt(2))
        p = Partition((2, 2))
        assert joint_entropy(rho) == 0.0
        assert marginal_entropy(rho, p) == pytest.approx(2 * math.log(2))
        assert mutual_information(rho, p) == pytest.approx(2 * math.log(2))

    def test_ghz_tripartite(self):
        """Test a three-qubit GHZ state has I = 3 ln 2"""
        psi = np.zeros(8)
        psi[0] = psi[7] = 1 / math.sqrt(2)
        rho = density_from_pure(psi)
        assert correlation_information(rho, Partition((2, 2, 2))) == pytest.approx(3 * math.log(2))

    def test_non_negative_random(self):
        """Test subadditivity over random multipartite states"""
        rng = make_rng(12)
        for _ in range(40):
            p = Partition(random_tripartite_dims(rng))
            rho = DensityOperator.from_matrix(random_density_matrix(p.total, rng))
            assert correlation_information(rho, p) >= -1e-9

    def test_reduced_states_order(self):
        """Test reduced states come back in partition order"""
        rho = product_state(basis_projector(2, 0), maximally_mixed(3))
        marginals = reduced_states(rho, Partition((2, 3)))
        assert [m.dim for m in marginals] == [2, 3]

    def test_mutual_information_bipartite_only(self):
        """Test mutual information refuses tripartite partitions"""
        with pytest.raises(DimensionError):
            mutual_information(maximally_mixed(8), Partition((2, 2, 2)))

    def test_unitary_changes_match(self):
        """Test Delta S_ME equals Delta I under a global unitary"""
        rng = make_rng(13)
        p = Partition((2, 4))
        rho = DensityOperator.from_matrix(random_density_matrix(8, rng))
        rho_prime = evolve(rho, random_unitary(8, rng))
        delta_me = marginal_entropy(rho_prime, p) - marginal_entropy(rho, p)
        delta_i = correlation_information(rho_prime, p) - correlation_information(rho, p)
        assert delta_me == pytest.approx(delta_i, abs=1e-10)


class TestRelativeEntropy:
    """Relative entropy and its support behaviour"""

    def test_self_divergence_zero(self):
        """Test D(rho||rho) = 0"""
        rho = DensityOperator.from_matrix(random_density_matrix(4, make_rng(14)))
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_outside_support_is_infinite(self):
        """Test sigma outside the support of rho gives +inf"""
        assert relative_entropy(maximally_mixed(2), basis_projector(2, 0)) == math.inf

    def test_pure_against_mixed(self):
        """Test D(|0><0| || I/d) = ln d"""
        assert relative_entropy(basis_projector(3, 0), maximally_mixed(3)) == pytest.approx(math.log(3))

    def test_non_negative_random(self):
        """Test Klein's inequality on random pairs"""
        rng = make_rng(15)
        for _ in range(30):
            sigma = DensityOperator.from_matrix(random_density_matrix(3, rng))
            rho = DensityOperator.from_matrix(random_density_matrix(3, rng))
            assert relative_entropy(sigma, rho) >= 0.0

    def test_dimension_mismatch(self):
        """Test states of different dims cannot be compared"""
        with pytest.raises(DimensionError):
            relative_entropy(maximally_mixed(2), maximally_mixed(3))
