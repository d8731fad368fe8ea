"""
Report emission - deterministic JSON documents and the warning collector
"""

import json
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from cli.config import RunConfig
from core.check_report import CheckReport
from core.errors import InputError


class ReportLogHandler(logging.Handler):
    """Collects WARNING and higher log messages for the report's warnings list"""

    def __init__(self, max_entries: int = 1000):
        super().__init__(level=logging.WARNING)
        self.entries: List[str] = []
        self.max_entries = max_entries

    def emit(self, record):
        try:
            self.entries.append(f"{record.levelname}: {record.getMessage()}")
            if len(self.entries) > self.max_entries:
                self.entries.pop(0)
        except Exception:
            self.handleError(record)


def _format_float(value: float) -> str:
    return format(value, '.17g')


def encode(value: Any) -> Any:
    """JSON-ready copy: floats as 17-digit strings, complex as [re, im]"""
    if isinstance(value, CheckReport):
        return encode(value.to_dict())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return [_format_float(value.real), _format_float(value.imag)]
    if isinstance(value, np.ndarray):
        return encode(value.tolist())
    if isinstance(value, dict):
        return {str(key): encode(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(item) for item in value]
    if value is None or isinstance(value, str):
        return value
    return str(value)


def build_document(body: Dict[str, Any], config: RunConfig, passed: bool,
                   warnings: Optional[List[str]] = None) -> Dict[str, Any]:
    document = dict(body)
    document['config'] = config.to_dict()
    document['passed'] = bool(passed)
    document['warnings'] = list(warnings or [])
    return encode(document)


def emit_report(body: Dict[str, Any], config: RunConfig, passed: bool,
                warnings: Optional[List[str]] = None) -> str:
    """Serialize with sorted keys and write to config.output or stdout"""
    text = json.dumps(build_document(body, config, passed, warnings), indent=2, sort_keys=True) + "\n"
    if config.output:
        try:
            Path(config.output).write_text(text, encoding='utf-8')
        except OSError as e:
            raise InputError(f"Cannot write report to '{config.output}': {e.strerror or e}") from e
    else:
        sys.stdout.write(text)
    return text
