"""
Utilities package for qthermo
"""

from .csv_output import render_csv, write_csv
from .performance import measure_performance, performance_monitor
from .random_states import make_rng
from .validation import config_hash, load_run_config

__all__ = [
    'measure_performance',
    'performance_monitor',
    'make_rng',
    'config_hash',
    'load_run_config',
    'render_csv',
    'write_csv',
]
