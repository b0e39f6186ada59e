#!/usr/bin/env python3
"""
Tests for the qthermo command line
"""

import math

import pytest
from typer.testing import CliRunner

from qthermo import EXIT_CONFIG, EXIT_OK, app, fig1_point
from tests.test_scenario_runner import write_random_scenario_toml, write_scenario_toml
from utils.csv_output import read_csv, read_metadata

MUTUAL_INFO_HALF = 2 * math.log(4) - 1.5 * math.log(3)


@pytest.fixture
def runner():
    return CliRunner()


class TestFigureCommands:
    """Figure data written as CSV"""

    def test_fig1(self, runner, tmp_path):
        """Test the initial-correlation sweep over |xi|"""
        out = tmp_path / 'fig1.csv'
        result = runner.invoke(app, ['fig1', '--points', '5', '--jobs', '1', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        text = out.read_text()
        rows = read_csv(text)
        assert len(rows) == 5
        assert float(rows[2]['xi_abs']) == 0.5
        assert float(rows[2]['mutual_information_nats']) == pytest.approx(MUTUAL_INFO_HALF, abs=1e-8)
        assert float(read_metadata(text)['max_closed_form_error']) < 1e-10

    def test_fig1_point_endpoints(self):
        """Test uncorrelated endpoints of the sweep"""
        assert fig1_point(0.0) == pytest.approx(0.0, abs=1e-12)
        assert fig1_point(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_fig1_too_few_points(self, runner):
        """Test a single sample is a configuration error"""
        result = runner.invoke(app, ['fig1', '--points', '1'])
        assert result.exit_code == EXIT_CONFIG

    def test_fig2_one_rabi_period(self, runner, tmp_path):
        """Test dI/dt starts positive and turns negative within one Rabi period"""
        out = tmp_path / 'fig2.csv'
        result = runner.invoke(app, ['fig2', '--steps', '60', '--tmax', '1.5', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        text = out.read_text()
        rows = read_csv(text)
        assert len(rows) == 61
        values = [float(row['value']) for row in rows]
        assert values[1] > 0
        assert min(values) < 0
        assert read_metadata(text)['command'] == 'fig2'

    def test_fig4_starts_at_zero(self, runner, tmp_path):
        """Test D(t) - D(0) vanishes at t = 0"""
        out = tmp_path / 'fig4.csv'
        result = runner.invoke(app, ['fig4', '--steps', '10', '--tmax', '1.0', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        rows = read_csv(out.read_text())
        assert float(rows[0]['value']) == 0.0

    def test_bad_config_file(self, runner, tmp_path):
        """Test an invalid config exits with the configuration code"""
        path = tmp_path / 'bad.toml'
        path.write_text("[jc]\nxi_real = 2.0\n")
        result = runner.invoke(app, ['fig2', '--config', str(path)])
        assert result.exit_code == EXIT_CONFIG


class TestVerifyCommand:
    """Identity verification"""

    def test_small_run_passes(self, runner, tmp_path):
        """Test a few instances pass every gate"""
        out = tmp_path / 'verify.csv'
        result = runner.invoke(app, ['verify', '-n', '3', '--jobs', '1', '--seed', '9', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        text = out.read_text()
        rows = read_csv(text)
        assert len(rows) == 6
        assert all(row['result'] == 'pass' for row in rows)
        assert read_metadata(text)['seed'] == '9'
        assert float(read_metadata(text)['wall_time_ms']) > 0

    def test_config_for_other_command(self, runner, tmp_path):
        """Test a config written for another command is refused"""
        path = tmp_path / 'fig2.toml'
        path.write_text("command = \"fig2\"\n")
        result = runner.invoke(app, ['verify', '--config', str(path), '-n', '1', '--jobs', '1'])
        assert result.exit_code == EXIT_CONFIG

    def test_negative_instances(self, runner):
        """Test a negative instance count is refused"""
        result = runner.invoke(app, ['verify', '-n', '-1', '--jobs', '1'])
        assert result.exit_code == EXIT_CONFIG


class TestRunCommand:
    """User scenarios from TOML"""

    def test_run_scenario(self, runner, tmp_path):
        """Test a scenario file produces one row per grid point"""
        config = write_scenario_toml(tmp_path / 'scenario.toml')
        out = tmp_path / 'run.csv'
        result = runner.invoke(app, ['run', '--config', str(config), '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        text = out.read_text()
        assert len(read_csv(text)) == 13
        assert read_metadata(text)['scenario'] == 'qubit-ladder'

    def test_steps_override(self, runner, tmp_path):
        """Test --steps overrides the scenario grid"""
        config = write_scenario_toml(tmp_path / 'scenario.toml')
        out = tmp_path / 'run.csv'
        result = runner.invoke(app, ['run', '--config', str(config), '--steps', '4', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        assert len(read_csv(out.read_text())) == 5

    def test_cli_seed_overrides_file(self, runner, tmp_path):
        """Test --seed drives the random initial state and is the seed recorded in the header"""
        config = write_random_scenario_toml(tmp_path / 'scenario.toml', seed=5)
        texts = {}
        for seed in ('', '1', '2'):
            out = tmp_path / f"run{seed}.csv"
            args = ['run', '--config', str(config), '--out', str(out)]
            if seed:
                args += ['--seed', seed]
            result = runner.invoke(app, args)
            assert result.exit_code == EXIT_OK, result.output
            texts[seed] = out.read_text()

        assert read_metadata(texts[''])['seed'] == '5'
        assert read_metadata(texts['1'])['seed'] == '1'
        assert read_metadata(texts['2'])['seed'] == '2'
        first_rows = {seed: read_csv(text)[0] for seed, text in texts.items()}
        assert first_rows['1']['s_system'] != first_rows['2']['s_system']
        assert first_rows['1']['s_system'] != first_rows['']['s_system']

    def test_non_hermitian_scenario(self, runner, tmp_path):
        """Test a bad matrix in the scenario exits with the configuration code"""
        config = write_scenario_toml(tmp_path / 'scenario.toml')
        text = config.read_text().replace("real = [0.0, 0.0, 0.0, 1.0]", "real = [0.0, 1.0, 0.0, 1.0]")
        config.write_text(text)
        result = runner.invoke(app, ['run', '--config', str(config)])
        assert result.exit_code == EXIT_CONFIG


class TestMiscCommands:
    """Appendix report and settings"""

    def test_appendix(self, runner, tmp_path):
        """Test the closed-form comparison writes one row"""
        out = tmp_path / 'appendix.csv'
        result = runner.invoke(app, ['appendix', '--points', '3', '--tmax', '1.0', '--out', str(out)])
        assert result.exit_code == EXIT_OK, result.output
        rows = read_csv(out.read_text())
        assert len(rows) == 1
        assert rows[0]['times_checked'] == '3'

    def test_settings(self, runner):
        """Test the settings table renders"""
        result = runner.invoke(app, ['settings'])
        assert result.exit_code == EXIT_OK

    def test_invalid_environment(self, runner, monkeypatch):
        """Test a bad environment setting is a configuration error"""
        monkeypatch.setenv('QTHERMO_JOBS', '-1')
        result = runner.invoke(app, ['settings'])
        assert result.exit_code == EXIT_CONFIG
