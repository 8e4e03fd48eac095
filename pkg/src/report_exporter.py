"""
Report Exporter
Deterministic JSON and RFC-4180 CSV output for experiment reports
"""

import csv
import io
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars, arrays, enums and tuples; non-finite floats become None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.complexfloating, complex)):
        return {'re': to_jsonable(value.real), 'im': to_jsonable(value.imag)}
    return value


class ReportExporter:
    """Handles export of experiment reports to JSON and CSV"""

    def __init__(self):
        self.supported_formats = ['json', 'csv']

    def render_json(self, report: Dict[str, Any]) -> str:
        """Sorted keys and fixed indentation so identical reports are byte-identical"""
        return json.dumps(to_jsonable(report), indent=2, ensure_ascii=False, sort_keys=True) + "\n"

    def render_csv(self, rows: Sequence[Sequence[Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\r\n')
        for row in rows:
            writer.writerow(['' if cell is None else cell for cell in row])
        return buffer.getvalue()

    def export_report(self, report: Dict[str, Any], output_format: str, output_path: Path,
                      csv_rows: Optional[List[List[Any]]] = None) -> bool:
        """Write the report in the requested format"""
        output_format = output_format.lower()
        if not self.validate_format(output_format):
            raise ValueError(f"Unsupported format: {output_format}")
        if output_format == 'csv' and csv_rows is None:
            raise ValueError("CSV export needs tabular rows; this report has none")

        content = self.render_json(report) if output_format == 'json' else self.render_csv(csv_rows)
        try:
            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='') as f:
                f.write(content)
        except OSError as e:
            logger.error(f"Export error for {output_path}: {e}")
            return False
        logger.info(f"Report written to {output_path}")
        return True

    def get_supported_formats(self) -> List[str]:
        return self.supported_formats.copy()

    def validate_format(self, format_name: str) -> bool:
        return format_name.lower() in self.supported_formats
