#!/usr/bin/env python3
"""
qthermo - information-thermodynamics ledger for correlated quantum systems
Command-line front end: figure data as CSV, random-instance identity
verification, user scenarios and the appendix consistency report.
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from config.settings import get_settings, validate_configuration
from entropy_info import mutual_information
from errors import ConfigError, QThermoError
from identity_gates import RUN_ALL_METRIC, IdentityGatesEngine, VerificationReport
from jaynes_cummings import (JCParams, appendix_consistency_report, config_hash, initial_correlation,
                             initial_state, simulate)
from law_ledger import Trajectory, flux_series, richardson_refinement
from scenario_runner import (TRAJECTORY_COLUMNS, run_scenario, scenario_from_config, trajectory_metadata,
                             trajectory_rows)
from utils.csv_output import write_csv
from utils.performance import performance_monitor
from utils.validation import RunConfigModel, load_run_config

logger = logging.getLogger(__name__)

# Human-facing output goes to stderr; stdout carries CSV
console = Console(stderr=True)

app = typer.Typer(
    name="qthermo",
    help="Information-thermodynamics ledger for correlated quantum systems",
    no_args_is_help=True,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

FIG1_POINTS = 201
FIG2_XI = 0.5
FIG3_XI = 0.71
FIG4_XI = 0.71
APPENDIX_POINTS = 201

ConfigOption = typer.Option(None, "--config", "-c", help="TOML configuration file")
OutOption = typer.Option(None, "--out", "-o", help="Output CSV path (stdout when omitted)")
SeedOption = typer.Option(None, "--seed", help="Seed for random instances")
JobsOption = typer.Option(None, "--jobs", "-j", help="Worker processes (0 = all cores)")
XiOption = typer.Option(None, "--xi", help="Initial amplitude xi")
StepsOption = typer.Option(None, "--steps", help="Number of time steps")
TmaxOption = typer.Option(None, "--tmax", help="Final time")


def _configure_logging(verbose: bool):
    level = logging.DEBUG if verbose else get_settings()['QTHERMO_LOG_LEVEL']
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=False)],
        force=True,
    )


@app.callback()
def cli(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")):
    """Information-thermodynamics ledger for correlated quantum systems"""
    _configure_logging(verbose)


@contextmanager
def cli_errors() -> Iterator[None]:
    """Map library exceptions onto exit codes"""
    try:
        validate_configuration()
        yield
    except ConfigError as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG)
    except QThermoError as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        raise typer.Exit(EXIT_NUMERIC)


def _resolve_jobs(config: RunConfigModel, jobs: Optional[int]) -> int:
    if jobs is not None:
        return jobs
    if config.jobs is not None:
        return config.jobs
    return get_settings()['QTHERMO_JOBS']


def _resolve_seed(config: RunConfigModel, seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    if config.seed is not None:
        return config.seed
    return get_settings()['QTHERMO_DEFAULT_SEED']


def _output_path(config: RunConfigModel, out: Optional[Path]) -> Optional[Path]:
    if out is not None:
        return out
    return Path(config.output) if config.output else None


def _jc_params(config: RunConfigModel, default_xi: float, xi: Optional[float],
               steps: Optional[int], tmax: Optional[float]) -> JCParams:
    """Figure parameters: CLI flags over config file over figure defaults"""
    model = config.jc
    explicit = model.model_fields_set
    if xi is not None:
        amplitude = complex(xi)
    elif 'xi_real' in explicit or 'xi_imag' in explicit:
        amplitude = model.xi
    else:
        amplitude = complex(default_xi)
    if steps is None:
        steps = model.steps if 'steps' in explicit else get_settings()['QTHERMO_DEFAULT_STEPS']
    return JCParams(
        omega0=model.omega0,
        omega=model.omega,
        g=model.g,
        n=model.n,
        xi=amplitude if amplitude.imag else amplitude.real,
        d_fock=model.d_fock,
        t_max=model.t_max if tmax is None else tmax,
        steps=steps,
    )


def _sweep(fn: Callable[[float], float], items: Sequence[float], jobs: int) -> List[float]:
    """Ordered map, optionally over worker processes"""
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs or None) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // 16)))


def fig1_point(xi_abs: float, n: int = 7) -> float:
    """Mutual information of the correlated initial state, evaluated on the joint density"""
    params = JCParams(n=n, xi=float(xi_abs), d_fock=n + 2, steps=2)
    return mutual_information(initial_state(params), params.partition)


def _jc_metadata(command: str, params: JCParams) -> Dict[str, Any]:
    return {'command': command, **{f"jc.{k}": v for k, v in params.as_dict().items()}}


def _figure_series(command: str, traj: Trajectory) -> np.ndarray:
    if command == 'fig4':
        d_bath = traj.column('d_bath')
        return d_bath - d_bath[0]
    flux = flux_series(traj)
    di = np.array([point.di for point in flux])
    if command == 'fig2':
        return di
    return di + np.array([point.dd for point in flux])


def _report_refinement(params: JCParams):
    report = richardson_refinement(lambda steps: simulate(replace(params, steps=steps)), params.steps)
    table = Table(title="Flux refinement")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Grids", ", ".join(str(s) for s in report.steps))
    table.add_row("|h vs h/2|", f"{report.coarse_difference:.3e}")
    table.add_row("|h/2 vs h/4|", f"{report.fine_difference:.3e}")
    table.add_row("Observed order", f"{report.observed_order:.3f}")
    table.add_row("Flux identity residuals", ", ".join(f"{r:.2e}" for r in report.identity_residuals))
    console.print(table)


def _run_figure(command: str, default_xi: float, config_path: Optional[Path], out: Optional[Path],
                xi: Optional[float], steps: Optional[int], tmax: Optional[float], refine: bool):
    with cli_errors():
        config = load_run_config(config_path, command)
        params = _jc_params(config, default_xi, xi, steps, tmax)
        traj = simulate(params)
        values = _figure_series(command, traj)
        rows = [{'t': t, 'value': float(v)} for t, v in zip(traj.times, values)]
        write_csv(_output_path(config, out), ['t', 'value'], rows,
                  trajectory_metadata(traj, extra=_jc_metadata(command, params)))
        negative = int(np.count_nonzero(values < 0))
        console.print(f"[green]✓ {command}: {len(rows)} rows, {negative} negative value(s), "
                      f"min {values.min():.6g}[/green]")
        if refine:
            _report_refinement(params)


@app.command()
def fig1(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
         jobs: Optional[int] = JobsOption,
         points: int = typer.Option(FIG1_POINTS, "--points", help="Number of |xi| samples")):
    """Initial correlation 2h(|xi|^2) as a function of |xi|"""
    with cli_errors():
        if points < 2:
            raise ConfigError("need at least 2 points", field='points')
        config = load_run_config(config_path, 'fig1')
        grid = np.linspace(0.0, 1.0, points)
        values = _sweep(fig1_point, [float(x) for x in grid], _resolve_jobs(config, jobs))
        rows = [{'xi_abs': float(x), 'mutual_information_nats': v} for x, v in zip(grid, values)]
        metadata = {'command': 'fig1', 'points': points, 'closed_form': '2*h(|xi|^2)',
                    'max_closed_form_error': max(abs(v - initial_correlation(x)) for x, v in zip(grid, values))}
        write_csv(_output_path(config, out), ['xi_abs', 'mutual_information_nats'], rows, metadata)
        peak = int(np.argmax(values))
        console.print(f"[green]✓ fig1: peak {values[peak]:.10f} at |xi|={grid[peak]:.8f}[/green]")


@app.command()
def fig2(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
         xi: Optional[float] = XiOption, steps: Optional[int] = StepsOption,
         tmax: Optional[float] = TmaxOption,
         refine: bool = typer.Option(False, "--refine", help="Report flux convergence under grid refinement")):
    """Rate of change of the correlation information dI/dt"""
    _run_figure('fig2', FIG2_XI, config_path, out, xi, steps, tmax, refine)


@app.command()
def fig3(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
         xi: Optional[float] = XiOption, steps: Optional[int] = StepsOption,
         tmax: Optional[float] = TmaxOption,
         refine: bool = typer.Option(False, "--refine", help="Report flux convergence under grid refinement")):
    """dI/dt + dD/dt"""
    _run_figure('fig3', FIG3_XI, config_path, out, xi, steps, tmax, refine)


@app.command()
def fig4(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
         xi: Optional[float] = XiOption, steps: Optional[int] = StepsOption,
         tmax: Optional[float] = TmaxOption):
    """Change of the bath divergence from its thermal reference, D(t) - D(0)"""
    _run_figure('fig4', FIG4_XI, config_path, out, xi, steps, tmax, refine=False)


def _display_verification(report: VerificationReport):
    table = Table(title=f"Identity verification (seed {report.seed}, {report.instances} instances)")
    table.add_column("Gate", style="cyan")
    table.add_column("Result")
    table.add_column("Instances", justify="right")
    table.add_column("Failures", justify="right")
    table.add_column("Max residual", justify="right")
    table.add_column("Time (ms)", justify="right")
    for gate in report.gates:
        colour = "green" if gate.passed else "red"
        table.add_row(gate.gate_name, f"[{colour}]{gate.result.value}[/{colour}]", str(gate.instances),
                      str(gate.failures), f"{gate.max_residual:.3e}", f"{gate.duration_ms:.0f}")
    console.print(table)
    for gate in report.gates:
        if gate.issues:
            console.print(Panel("\n".join(gate.issues), title=f"{gate.gate_name} issues", border_style="red"))


@app.command()
def verify(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
           seed: Optional[int] = SeedOption, jobs: Optional[int] = JobsOption,
           instances: Optional[int] = typer.Option(None, "--instances", "-n", help="Random instances per identity")):
    """Check the information-thermodynamics identities on random instances"""
    with cli_errors():
        config = load_run_config(config_path, 'verify')
        if instances is None:
            instances = config.verify.instances if 'instances' in config.verify.model_fields_set \
                else get_settings()['QTHERMO_VERIFY_INSTANCES']
        if instances < 0:
            raise ConfigError("must be non-negative", field='instances')
        engine = IdentityGatesEngine(seed=_resolve_seed(config, seed), instances=instances,
                                     jobs=_resolve_jobs(config, jobs), tolerance=config.verify.tolerance)
        report = engine.run_all()
        wall_time_ms = performance_monitor.get_metric_stats(RUN_ALL_METRIC).get('latest', 0.0)
        fields = ['gate', 'result', 'instances', 'failures', 'max_residual', 'tolerance']
        write_csv(_output_path(config, out), fields, [gate.as_row() for gate in report.gates],
                  {'command': 'verify', 'seed': report.seed, 'instances': report.instances,
                   'passed': report.passed, 'wall_time_ms': round(wall_time_ms, 1)})
        _display_verification(report)
        console.print(f"Total verification time: {wall_time_ms:.0f} ms")
    if not report.passed:
        raise typer.Exit(EXIT_VERIFY_FAILED)


@app.command()
def run(config_path: Path = typer.Option(..., "--config", "-c", help="TOML scenario file"),
        out: Optional[Path] = OutOption, seed: Optional[int] = SeedOption,
        steps: Optional[int] = StepsOption):
    """Ledger a user scenario of piecewise-constant driving legs"""
    with cli_errors():
        config = load_run_config(config_path, 'run')
        resolved_seed = _resolve_seed(config, seed)
        scenario = scenario_from_config(config, resolved_seed)
        if steps is not None:
            if steps < 2:
                raise ConfigError("must be >= 2", field='steps')
            scenario = replace(scenario, steps=steps)
        traj = run_scenario(scenario)
        write_csv(_output_path(config, out), TRAJECTORY_COLUMNS, trajectory_rows(traj),
                  trajectory_metadata(traj, seed=resolved_seed,
                                      extra={'command': 'run', 'scenario': scenario.name}))
        console.print(f"[green]✓ Scenario '{scenario.name}': {len(traj)} records[/green]")


@app.command()
def appendix(config_path: Optional[Path] = ConfigOption, out: Optional[Path] = OutOption,
             xi: Optional[float] = XiOption, tmax: Optional[float] = TmaxOption,
             points: int = typer.Option(APPENDIX_POINTS, "--points", help="Comparison times")):
    """Compare the closed-form reduced states with direct evolution"""
    with cli_errors():
        config = load_run_config(config_path, 'appendix')
        params = _jc_params(config, FIG2_XI, xi, None, tmax)
        report = appendix_consistency_report(params, points=points)
        row = {
            'times_checked': report.times_checked,
            'max_trace_distance_system': report.max_trace_distance_system,
            'max_trace_distance_bath': report.max_trace_distance_bath,
            'max_trace_error': report.max_trace_error,
            'min_eigenvalue': report.min_eigenvalue,
            'valid_states': report.valid_states,
        }
        if _output_path(config, out) is not None:
            write_csv(_output_path(config, out), list(row), [row],
                      {'command': 'appendix', 'config_hash': config_hash(params)})
        status = "[green]agrees[/green]" if report.consistent else "[yellow]disagrees[/yellow]"
        console.print(Panel(
            "\n".join(f"{key}: {value}" for key, value in row.items()),
            title=f"Closed form vs direct evolution: {status}",
        ))


@app.command()
def settings():
    """Show the effective configuration"""
    with cli_errors():
        values = get_settings()
        table = Table(title=f"qthermo {values['QTHERMO_VERSION']}")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        for key, value in values.items():
            table.add_row(key, str(value))
        console.print(table)


def main():
    """Main entry point"""
    try:
        app()
    except KeyboardInterrupt:
        console.print("\n[yellow]Operation cancelled by user[/yellow]")
        sys.exit(0)


if __name__ == "__main__":
    main()
