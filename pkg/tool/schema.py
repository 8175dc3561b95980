"""
JSON schema helpers and report definitions

Rationals are written as "p/q" strings, reals rounded to 12 significant
digits. No wall-clock data is written, so identical runs give identical files.
"""

import json
import math
from dataclasses import dataclass, field, asdict, is_dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

import numpy as np

SCHEMA_VERSION = "newtonpoly-report/1"
SIGNIFICANT_DIGITS = 12


def format_rational(value: Union[Fraction, int]) -> str:
    """Exact rational as "p/q" (or "n" for integers)"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: Union[str, int, float, Fraction]) -> Fraction:
    """
    Read "p/q", an integer or a decimal literal as an exact Fraction

    Raises:
        ValueError: If text is not a rational literal
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        return Fraction(repr(text))
    return Fraction(str(text).strip())


def format_real(value: float) -> Optional[float]:
    """Round to 12 significant digits; non-finite values become None"""
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def format_real_text(value: float) -> str:
    """CSV spelling of a real"""
    value = float(value)
    if not math.isfinite(value):
        return "nan"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert results to JSON-safe values"""
    if hasattr(obj, 'to_dict') and callable(obj.to_dict):
        return to_jsonable(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_real(obj)
    if isinstance(obj, complex):
        return {'re': format_real(obj.real), 'im': format_real(obj.imag)}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(payload: Any, indent: int = 2) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)"""
    return json.dumps(to_jsonable(payload), indent=indent, sort_keys=True, ensure_ascii=False) + "\n"


def envelope(command: str, config: Dict[str, Any], result: Any) -> Dict[str, Any]:
    """Wrap a command result with the schema version and the resolved run config"""
    return {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'config': config,
        'result': to_jsonable(result),
    }


# ============================================================================
# VERIFY REPORT
# ============================================================================

@dataclass
class VerifyReport:
    """End-to-end verification of one surface: exponents, decay and Knapp scans"""
    poly: str
    exponents: Dict[str, Any]
    decay: Dict[str, Any]
    knapp: List[Dict[str, Any]]
    checks: Dict[str, Any] = field(default_factory=dict)
    passed: bool = False
    decay_conforms: bool = False
    knapp_bracket: bool = False
    warnings: List[str] = field(default_factory=list)
    errors: List[Dict[str, Any]] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        """Convert to dictionary ("pass" is the key required by consumers)"""
        result = to_jsonable(asdict(self))
        result['pass'] = result.pop('passed')
        return result

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerifyReport":
        data = dict(data)
        data['passed'] = data.pop('pass', False)
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in data.items() if k in known})

    def to_json(self, indent: int = 2) -> str:
        return dumps(self.to_dict(), indent=indent)

    def save_to_file(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(self.to_json())

    def to_markdown(self) -> str:
        """Render the report as Markdown"""
        e = self.exponents
        lines = [
            f"# Verification report: `{self.poly}`",
            "",
            f"**Verdict:** {'PASS' if self.passed else 'FAIL'}",
            "",
            "## Exponents",
            "",
            "| quantity | value |",
            "|---|---|",
        ]
        for key in ('d', 'h', 'beta', 'p_star', 'q_star', 'q_lower', 'm', 'adapted', 'certified'):
            if key in e:
                lines.append(f"| {key} | {e[key]} |")

        lines += ["", "## Decay of the surface-measure Fourier transform", ""]
        if self.decay:
            lines.append(f"- fitted exponent (worst direction): {self.decay.get('fitted_exponent')}")
            lines.append(f"- reference 1/h: {self.decay.get('reference_exponent')}")
            lines.append(f"- conforms: {self.decay_conforms}")
            slopes = self.decay.get('direction_slopes', [])
            if slopes:
                lines += ["", "| direction | slope | stderr |", "|---|---|---|"]
                for row in slopes:
                    lines.append(f"| {row.get('index')} | {row.get('slope')} | {row.get('stderr')} |")

        lines += ["", "## Knapp scans", "", "| p | fitted slope | predicted slope | verdict |", "|---|---|---|---|"]
        for scan in self.knapp:
            lines.append(
                f"| {scan.get('p')} | {scan.get('fitted_slope')} | "
                f"{scan.get('predicted_slope')} | {scan.get('verdict')} |"
            )
        lines.append("")
        lines.append(f"Expected bracket bounded / critical / divergent: {self.knapp_bracket}")

        if self.warnings:
            lines += ["", "## Warnings", ""] + [f"- {w}" for w in self.warnings]
        if self.errors:
            lines += ["", "## Errors", ""] + [f"- {err.get('node')}: {err.get('error')}" for err in self.errors]
        return "\n".join(lines) + "\n"

    def save_to_markdown(self, filepath: str):
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(self.to_markdown())
