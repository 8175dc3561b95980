"""
Output writers for JSON summaries and plot-ready CSV tables
"""

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

from .schema import dumps, format_real_text

logger = logging.getLogger(__name__)


def write_json(path: str, payload: Any) -> Path:
    """Write deterministic JSON, creating parent directories"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps(payload))
    logger.info(f"Saved JSON: {path}")
    return path


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table with a fixed column order; floats use 12 significant digits"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_real_text(v) if isinstance(v, float) else v for v in row])
    logger.info(f"Saved CSV: {path}")
    return path
