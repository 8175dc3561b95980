"""
Report schema and persistence helpers

Exact-rational / fixed-precision formatting, the verify report dataclass and
deterministic JSON and CSV writers shared by every command.
"""

from .schema import (
    SCHEMA_VERSION,
    VerifyReport,
    dumps,
    envelope,
    format_rational,
    format_real,
    parse_rational,
    to_jsonable,
)
from .writers import write_csv, write_json

__all__ = [
    'SCHEMA_VERSION',
    'VerifyReport',
    'dumps',
    'envelope',
    'format_rational',
    'format_real',
    'parse_rational',
    'to_jsonable',
    'write_csv',
    'write_json',
]
__version__ = '2.0.0'
