#!/usr/bin/env python3
"""
Tests for random-instance identity verification
"""

import math

import pytest

from identity_gates import (RUN_ALL_METRIC, GateResult, IdentityGatesEngine, ValidationResult,
                            _entropy_increase_instance, _gibbs_identity_instance,
                            _landauer_instance, _product_start_instance, _second_law_instance,
                            _traditional_instance)
from utils.performance import MAX_ENTRIES, performance_monitor


class TestInstances:
    """Single seeded instances of each identity"""

    @pytest.mark.parametrize("check", [
        _entropy_increase_instance,
        _landauer_instance,
        _second_law_instance,
        _gibbs_identity_instance,
    ])
    def test_equalities_at_roundoff(self, check):
        """Test equality residuals vanish on a few instances"""
        for index in range(4):
            assert abs(check(42, index)) < 1e-8

    def test_inequalities_not_violated(self):
        """Test traditional inequalities hold from product thermal starts"""
        for index in range(4):
            assert _traditional_instance(42, index) < 1e-9

    def test_product_start(self):
        """Test correlation never goes negative from a product start"""
        assert _product_start_instance(42, 0) < 1e-9

    def test_instances_reproducible(self):
        """Test the same (seed, index) gives the same residual"""
        assert _landauer_instance(7, 3) == _landauer_instance(7, 3)


class TestGateResult:
    """Gate result bookkeeping"""

    def test_row_and_timestamp(self):
        """Test rows carry the outcome and a timestamp is set"""
        gate = GateResult(gate_name='landauer', result=ValidationResult.PASS, instances=5,
                          failures=0, max_residual=1e-14, tolerance=1e-8)
        assert gate.passed
        assert gate.timestamp is not None
        assert gate.as_row()['result'] == 'pass'


class TestIdentityGatesEngine:
    """Full verification runs"""

    def setup_method(self):
        """Setup a small serial engine"""
        self.engine = IdentityGatesEngine(seed=42, instances=5, jobs=1)

    def test_run_all_passes(self):
        """Test every gate passes on a small run"""
        report = self.engine.run_all()
        assert report.passed
        assert [gate.gate_name for gate in report.gates] == [
            'entropy_increase', 'landauer', 'second_law', 'gibbs_identity',
            'traditional_reductions', 'product_start_correlation',
        ]
        assert report.gates[-1].instances == 1
        assert all(math.isfinite(gate.max_residual) for gate in report.gates)

    def test_run_time_recorded(self):
        """Test each run adds a wall-time entry to the performance monitor"""
        before = performance_monitor.get_metric_stats(RUN_ALL_METRIC).get('count', 0)
        self.engine.run_all()
        stats = performance_monitor.get_metric_stats(RUN_ALL_METRIC)
        assert stats['latest'] > 0
        assert stats['count'] == min(before + 1, MAX_ENTRIES)

    def test_deterministic(self):
        """Test the same seed reproduces the same residuals"""
        first = self.engine.run_landauer()
        second = IdentityGatesEngine(seed=42, instances=5, jobs=1).run_landauer()
        assert first.max_residual == second.max_residual

    def test_tight_tolerance_fails(self):
        """Test an impossible tolerance marks the gate failed"""
        engine = IdentityGatesEngine(seed=42, instances=3, jobs=1, tolerance=1e-300)
        gate = engine.run_entropy_increase()
        assert gate.result is ValidationResult.FAIL
        assert gate.failures > 0
        assert gate.issues

    def test_zero_instances(self):
        """Test an empty run passes vacuously"""
        report = IdentityGatesEngine(seed=1, instances=0, jobs=1).run_all()
        assert report.passed
        assert all(gate.instances == 0 for gate in report.gates)

    def test_parallel_matches_serial(self):
        """Test worker processes return results in instance order"""
        serial = IdentityGatesEngine(seed=3, instances=4, jobs=1).run_gibbs_identity()
        parallel = IdentityGatesEngine(seed=3, instances=4, jobs=2).run_gibbs_identity()
        assert serial.max_residual == parallel.max_residual
