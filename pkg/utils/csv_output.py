#!/usr/bin/env python3
"""
CSV emission for qthermo
A '#'-prefixed metadata header precedes the column row; floats are written with
17 significant digits so values round-trip exactly.
"""

import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, TextIO

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        # negative zero prints as 0
        return format(value + 0.0, '.17g')
    if isinstance(value, int):
        return str(value)
    try:
        # numpy scalars
        return format_value(value.item())
    except AttributeError:
        return str(value)


def _write(fh: TextIO, fieldnames: List[str], rows: Iterable[Mapping[str, Any]],
           metadata: Optional[Dict[str, Any]]) -> int:
    for key, value in (metadata or {}).items():
        fh.write(f"# {key}: {format_value(value)}\n")
    writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow({k: format_value(row.get(k, '')) for k in fieldnames})
        count += 1
    return count


def write_csv(path: Optional[Path], fieldnames: List[str], rows: Iterable[Mapping[str, Any]],
              metadata: Optional[Dict[str, Any]] = None) -> int:
    """Write rows to `path`, or to stdout when path is None; returns the row count"""
    if path is None:
        return _write(sys.stdout, fieldnames, rows, metadata)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as fh:
        count = _write(fh, fieldnames, rows, metadata)
    logger.info(f"Wrote {count} rows to {path}")
    return count


def render_csv(fieldnames: List[str], rows: Iterable[Mapping[str, Any]],
               metadata: Optional[Dict[str, Any]] = None) -> str:
    buffer = io.StringIO()
    _write(buffer, fieldnames, rows, metadata)
    return buffer.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    """Parse CSV text produced by write_csv, skipping metadata lines"""
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    return list(csv.DictReader(lines))


def read_metadata(text: str) -> Dict[str, str]:
    metadata = {}
    for line in text.splitlines():
        if not line.startswith('# '):
            continue
        key, _, value = line[2:].partition(': ')
        metadata[key] = value
    return metadata
