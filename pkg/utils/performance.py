#!/usr/bin/env python3
"""
Timing utilities for qthermo
"""

import functools
import logging
import time
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

MAX_ENTRIES = 1000


class PerformanceMonitor:
    """Collects wall-clock durations per instrumented function"""

    def __init__(self):
        self.metrics: Dict[str, List[Dict[str, Any]]] = {}

    def record_metric(self, name: str, value: float, timestamp: Optional[datetime] = None):
        if timestamp is None:
            timestamp = datetime.now()

        entries = self.metrics.setdefault(name, [])
        entries.append({'value': value, 'timestamp': timestamp.isoformat()})

        # Keep only the most recent entries per metric
        if len(entries) > MAX_ENTRIES:
            self.metrics[name] = entries[-MAX_ENTRIES:]

    def get_metric_stats(self, name: str) -> Dict[str, float]:
        """Summary statistics for one metric"""
        if not self.metrics.get(name):
            return {}
        values = np.array([entry['value'] for entry in self.metrics[name]])
        return {
            'count': int(values.size),
            'avg': float(values.mean()),
            'min': float(values.min()),
            'max': float(values.max()),
            'latest': float(values[-1]),
        }


# Global performance monitor instance
performance_monitor = PerformanceMonitor()


def measure_performance(func: Callable) -> Callable:
    """Decorator recording the duration and outcome of each call"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        success = False
        try:
            result = func(*args, **kwargs)
            success = True
            return result
        finally:
            duration = (time.perf_counter() - start_time) * 1000
            metric_name = f"{func.__module__}.{func.__name__}"
            performance_monitor.record_metric(f"{metric_name}.duration_ms", duration)
            performance_monitor.record_metric(f"{metric_name}.success_rate", 1.0 if success else 0.0)
            logger.debug(f"Performance: {metric_name} took {duration:.2f}ms")

    return wrapper
